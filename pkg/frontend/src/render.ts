/** SVG rendering of the residual chart, bands, ticks and the selection. */

import {
  Band,
  TimeScale,
  Tick,
  ValueScale,
  consensusBands,
  eventTicks,
  labelBands,
  residualPath,
  residualRange,
  toX,
  toY,
  fromX,
} from "./chartmodel.js";
import type { LabellerState, LabellerStore } from "./store.js";
import { formatTime, parseTime } from "./timegrid.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartLayout {
  width: number;
  height: number;
  marginLeft: number;
  marginRight: number;
  marginTop: number;
  marginBottom: number;
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 1100,
  height: 420,
  marginLeft: 60,
  marginRight: 20,
  marginTop: 16,
  marginBottom: 28,
};

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

export class ChartView {
  private svg: SVGSVGElement;
  private timeScale: TimeScale | null = null;
  private valueScale: ValueScale | null = null;

  constructor(
    private readonly host: HTMLElement,
    private readonly store: LabellerStore,
    private readonly layout: ChartLayout = DEFAULT_LAYOUT,
  ) {
    this.svg = el("svg", {
      width: layout.width,
      height: layout.height,
      viewBox: `0 0 ${layout.width} ${layout.height}`,
    });
    this.svg.style.userSelect = "none";
    this.svg.style.cursor = "crosshair";
    host.appendChild(this.svg);
    this.svg.addEventListener("mousedown", (e) => {
      const t = this.pixelToTime(e);
      if (t !== null) this.store.beginDrag(t);
    });
    this.svg.addEventListener("mousemove", (e) => {
      const t = this.pixelToTime(e);
      if (t !== null) this.store.updateDrag(t);
    });
    window.addEventListener("mouseup", () => {
      this.store.endDrag();
    });
  }

  private pixelToTime(e: MouseEvent): number | null {
    if (!this.timeScale) return null;
    const rect = this.svg.getBoundingClientRect();
    const x = ((e.clientX - rect.left) / rect.width) * this.layout.width;
    return fromX(this.timeScale, x);
  }

  render(state: LabellerState): void {
    const { width, height, marginLeft, marginRight, marginTop, marginBottom } =
      this.layout;
    this.svg.replaceChildren();
    const page = state.page;
    if (!page || page.points.length === 0) {
      this.timeScale = null;
      const note = el("text", { x: width / 2, y: height / 2, "text-anchor": "middle" });
      note.textContent = "no residual data loaded";
      this.svg.appendChild(note);
      return;
    }
    const t0 = parseTime(page.from ?? page.points[0].t);
    const t1 = parseTime(page.to ?? page.points[page.points.length - 1].t);
    const ts: TimeScale = {
      t0,
      t1,
      x0: marginLeft,
      x1: width - marginRight,
    };
    const [v0, v1] = residualRange(page.points);
    const vs: ValueScale = {
      v0,
      v1,
      y0: height - marginBottom,
      y1: marginTop,
    };
    this.timeScale = ts;
    this.valueScale = vs;

    // zero line and frame
    this.svg.appendChild(
      el("line", {
        x1: ts.x0,
        x2: ts.x1,
        y1: toY(vs, 0),
        y2: toY(vs, 0),
        stroke: "#bbbbbb",
        "stroke-dasharray": "4 3",
      }),
    );

    // label bands under the line
    if (state.overlays.labels) {
      for (const band of labelBands(state.labels, ts)) {
        this.svg.appendChild(this.bandRect(band, vs));
      }
    }

    // consensus periods as hatched bands
    if (state.overlays.consensus) {
      this.svg.appendChild(this.hatchPattern());
      for (const band of consensusBands(state.labels, ts)) {
        const rect = el("rect", {
          x: band.x0,
          y: marginTop,
          width: Math.max(1, band.x1 - band.x0),
          height: height - marginTop - marginBottom,
          fill: "url(#consensus-hatch)",
          stroke: "#444444",
          "stroke-dasharray": "3 2",
          opacity: 0.55,
        });
        const title = document.createElementNS(SVG_NS, "title");
        title.textContent = `consensus: ${band.support} expert(s)`;
        rect.appendChild(title);
        this.svg.appendChild(rect);
      }
    }

    // residual line (gaps break the path)
    this.svg.appendChild(
      el("path", {
        d: residualPath(page.points, ts, vs),
        fill: "none",
        stroke: "#1a1a1a",
        "stroke-width": 1,
      }),
    );

    // detector event ticks
    if (state.overlays.events) {
      for (const tick of eventTicks(state.events, ts)) {
        this.svg.appendChild(this.tickLine(tick, vs));
      }
    }

    // active drag or committed selection
    const dragActive =
      state.dragOrigin !== null && state.dragCurrent !== null
        ? { start: Math.min(state.dragOrigin, state.dragCurrent), end: Math.max(state.dragOrigin, state.dragCurrent) }
        : null;
    const shown = dragActive ?? state.selection;
    if (shown) {
      this.svg.appendChild(
        el("rect", {
          x: toX(ts, shown.start),
          y: marginTop,
          width: Math.max(1, toX(ts, shown.end) - toX(ts, shown.start)),
          height: height - marginTop - marginBottom,
          fill: "rgba(30, 110, 190, 0.18)",
          stroke: "#1e6ebe",
        }),
      );
    }

    // x-axis end labels
    const left = el("text", { x: ts.x0, y: height - 8, "font-size": 11 });
    left.textContent = formatTime(t0);
    const right = el("text", {
      x: ts.x1,
      y: height - 8,
      "font-size": 11,
      "text-anchor": "end",
    });
    right.textContent = formatTime(t1);
    this.svg.append(left, right);
  }

  private hatchPattern(): SVGDefsElement {
    const defs = el("defs");
    const pattern = el("pattern", {
      id: "consensus-hatch",
      width: 6,
      height: 6,
      patternUnits: "userSpaceOnUse",
      patternTransform: "rotate(45)",
    });
    pattern.appendChild(
      el("line", { x1: 0, y1: 0, x2: 0, y2: 6, stroke: "#555555", "stroke-width": 1.5 }),
    );
    defs.appendChild(pattern);
    return defs;
  }

  private bandRect(band: Band, vs: ValueScale): SVGRectElement {
    const laneHeight = 10;
    const rect = el("rect", {
      x: band.x0,
      y: this.layout.marginTop + band.lane * laneHeight,
      width: Math.max(1, band.x1 - band.x0),
      height: vs.y0 - this.layout.marginTop,
      fill: band.color,
      opacity: 0.22,
      "data-label-id": band.labelId,
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = band.title;
    rect.appendChild(title);
    return rect;
  }

  private tickLine(tick: Tick, vs: ValueScale): SVGLineElement {
    const line = el("line", {
      x1: tick.x,
      x2: tick.x,
      y1: vs.y1,
      y2: vs.y0,
      stroke: tick.color,
      "stroke-width": 1.2,
      opacity: 0.8,
      "data-detector": tick.detector,
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${tick.detector} @ ${tick.t}`;
    line.appendChild(title);
    return line;
  }
}
