import { Api, ApiError } from "./api";
import type {
  EmbeddingRecord,
  LogEntry,
  PointView,
  ReportView,
  StatusView,
  Suggestion,
} from "./types";

export type Coloring = "uncertainty" | "hardness" | "inverse_elasticity";

export const COLORINGS: Coloring[] = ["uncertainty", "hardness", "inverse_elasticity"];

export const COLORING_LABELS: Record<Coloring, string> = {
  uncertainty: "uncertainty (region width)",
  hardness: "predicted hardness",
  inverse_elasticity: "predicted inverse elasticity",
};

// classification colors follow the campaign's reporting convention
export const CLASS_COLORS: Record<string, string> = {
  pareto_optimal: "black",
  discarded: "orange",
  undecided: "green",
};

function channelValue(p: PointView, coloring: Coloring): number | null {
  if (coloring === "uncertainty") return p.region_width;
  if (coloring === "hardness") return p.predicted_hardness;
  return p.predicted_inverse_elasticity;
}

/** Display-only color ramp: value in [0, 1] to a blue-to-red hue. */
export function rampColor(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  return `hsl(${Math.round(240 - 240 * clamped)}, 75%, 50%)`;
}

interface AppState {
  status: StatusView | null;
  points: PointView[];
  suggestions: Suggestion[];
  embedding: EmbeddingRecord[];
  report: ReportView | null;
  log: LogEntry[];
  coloring: Coloring;
  selectedPointId: number | null;
  error: string | null;
  formError: string | null;
  overrideError: string | null;
}

const SVG_NS = "http://www.w3.org/2000/svg";

export class App {
  state: AppState = {
    status: null,
    points: [],
    suggestions: [],
    embedding: [],
    report: null,
    log: [],
    coloring: "uncertainty",
    selectedPointId: null,
    error: null,
    formError: null,
    overrideError: null,
  };

  private formValues = { pointId: "", hardness: "", inverseElasticity: "", note: "" };

  constructor(
    private root: HTMLElement,
    private api: Api,
  ) {}

  async init(): Promise<void> {
    try {
      const [status, points, suggestions, embedding, report, log] = await Promise.all([
        this.api.status(),
        this.api.points(),
        this.api.suggestions(),
        this.api.embedding(),
        this.api.report(),
        this.api.log(),
      ]);
      this.state.status = status;
      this.state.points = points.points;
      this.state.suggestions = suggestions.suggestions;
      this.state.embedding = embedding.embedding;
      this.state.report = report;
      this.state.log = log.log;
      this.state.error = null;
    } catch (err) {
      this.state.error = err instanceof ApiError ? err.detail : String(err);
    }
    this.render();
  }

  cycleColoring(): void {
    const i = COLORINGS.indexOf(this.state.coloring);
    this.state.coloring = COLORINGS[(i + 1) % COLORINGS.length];
    this.render();
  }

  selectPoint(id: number): void {
    this.state.selectedPointId = id;
    this.state.overrideError = null;
    this.render();
  }

  async submitMeasurement(): Promise<void> {
    const pointId = Number(this.formValues.pointId);
    const hardness = Number(this.formValues.hardness);
    const inverseElasticity = Number(this.formValues.inverseElasticity);
    if (!Number.isInteger(pointId) || pointId < 0) {
      this.state.formError = "point id must be a nonnegative integer";
      this.render();
      return;
    }
    if (!Number.isFinite(hardness) || hardness <= 0) {
      this.state.formError = "hardness must be a positive number";
      this.render();
      return;
    }
    if (!Number.isFinite(inverseElasticity) || inverseElasticity <= 0) {
      this.state.formError = "inverse elasticity must be a positive number";
      this.render();
      return;
    }
    try {
      await this.api.submitMeasurement({
        point_id: pointId,
        hardness,
        inverse_elasticity: inverseElasticity,
        note: this.formValues.note,
      });
      // no optimistic update: always refetch server truth
      const [status, suggestions] = await Promise.all([
        this.api.status(),
        this.api.suggestions(),
      ]);
      this.state.status = status;
      this.state.suggestions = suggestions.suggestions;
      this.state.formError = null;
      this.formValues = { pointId: "", hardness: "", inverseElasticity: "", note: "" };
    } catch (err) {
      this.state.formError = err instanceof ApiError ? err.detail : String(err);
    }
    this.render();
  }

  async overrideSelected(): Promise<void> {
    const id = this.state.selectedPointId;
    if (id === null) return;
    try {
      await this.api.override(id);
      const [log, suggestions] = await Promise.all([
        this.api.log(),
        this.api.suggestions(),
      ]);
      this.state.log = log.log;
      this.state.suggestions = suggestions.suggestions;
      this.state.overrideError = null;
    } catch (err) {
      this.state.overrideError = err instanceof ApiError ? err.detail : String(err);
    }
    this.render();
  }

  render(): void {
    this.root.replaceChildren();
    this.renderBanner();
    if (this.state.error) return;
    this.renderStatusPanel();
    this.renderEmbedding();
    this.renderParetoChart();
    this.renderReport();
    this.renderMeasurementForm();
    this.renderOverridePanel();
    this.renderLog();
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
    if (text !== undefined) node.textContent = text;
    return node;
  }

  private renderBanner(): void {
    if (!this.state.error) return;
    const banner = this.el("div", { id: "error-banner", class: "banner error" });
    banner.textContent = `service error: ${this.state.error}`;
    this.root.appendChild(banner);
  }

  private renderStatusPanel(): void {
    const s = this.state.status;
    const panel = this.el("section", { id: "status-panel" });
    panel.appendChild(this.el("h2", {}, "Campaign status"));
    if (!s) {
      panel.appendChild(this.el("p", {}, "no status available"));
      this.root.appendChild(panel);
      return;
    }
    panel.appendChild(this.el("p", { id: "status-iteration" }, `Iteration: ${s.iteration}`));
    panel.appendChild(
      this.el("p", { id: "status-sampled" }, `Sampled: ${s.sampled} / ${s.grid_size}`),
    );
    panel.appendChild(
      this.el(
        "p",
        { id: "status-counts" },
        `Pareto: ${s.counts.pareto}, discarded: ${s.counts.discarded}, undecided: ${s.counts.undecided}`,
      ),
    );
    panel.appendChild(
      this.el("p", { id: "status-converged" }, `Converged: ${s.converged ? "yes" : "no"}`),
    );
    this.root.appendChild(panel);
  }

  private renderEmbedding(): void {
    const section = this.el("section", { id: "embedding-panel" });
    section.appendChild(this.el("h2", {}, "Design-space map"));

    const toggle = this.el("button", { id: "coloring-toggle" }, "Cycle coloring");
    toggle.addEventListener("click", () => this.cycleColoring());
    section.appendChild(toggle);
    section.appendChild(
      this.el(
        "span",
        { id: "coloring-legend" },
        `colored by ${COLORING_LABELS[this.state.coloring]}`,
      ),
    );

    if (this.state.embedding.length === 0) {
      section.appendChild(
        this.el("p", { id: "embedding-placeholder" }, "no design points to show yet"),
      );
      this.root.appendChild(section);
      return;
    }

    const byId = new Map(this.state.points.map((p) => [p.id, p]));
    const suggested = new Set(this.state.suggestions.map((s) => s.id));
    const xs = this.state.embedding.map((e) => e.x);
    const ys = this.state.embedding.map((e) => e.y);
    const xMin = Math.min(...xs);
    const xMax = Math.max(...xs);
    const yMin = Math.min(...ys);
    const yMax = Math.max(...ys);
    const values = this.state.points
      .map((p) => channelValue(p, this.state.coloring))
      .filter((v): v is number => v !== null);
    const vMin = values.length ? Math.min(...values) : 0;
    const vMax = values.length ? Math.max(...values) : 1;

    const width = 420;
    const height = 420;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("id", "embedding-svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    const scale = (v: number, lo: number, hi: number, size: number) =>
      hi > lo ? ((v - lo) / (hi - lo)) * (size - 20) + 10 : size / 2;

    for (const rec of this.state.embedding) {
      const point = byId.get(rec.id);
      const value = point ? channelValue(point, this.state.coloring) : null;
      const fill =
        value === null ? "lightgray" : rampColor(vMax > vMin ? (value - vMin) / (vMax - vMin) : 0.5);
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(scale(rec.x, xMin, xMax, width)));
      circle.setAttribute("cy", String(scale(rec.y, yMin, yMax, height)));
      circle.setAttribute("r", suggested.has(rec.id) ? "6" : "3");
      circle.setAttribute("fill", fill);
      circle.setAttribute("data-id", String(rec.id));
      const classes = ["pt"];
      if (suggested.has(rec.id)) {
        classes.push("suggested");
        circle.setAttribute("stroke", "red");
        circle.setAttribute("stroke-width", "2");
      }
      if (rec.id === this.state.selectedPointId) classes.push("selected");
      circle.setAttribute("class", classes.join(" "));
      if (point) {
        const title = document.createElementNS(SVG_NS, "title");
        title.textContent =
          `point ${point.id}: pvp10=${point.c_pvp10.toFixed(3)}, ` +
          `pvp40=${point.c_pvp40.toFixed(3)}, pvp360=${point.c_pvp360.toFixed(3)}, ` +
          `speed=${point.spin_speed}, dilution=${point.dilution}`;
        circle.appendChild(title);
      }
      circle.addEventListener("click", () => this.selectPoint(rec.id));
      svg.appendChild(circle);
    }
    section.appendChild(svg);
    this.root.appendChild(section);
  }

  private renderParetoChart(): void {
    const section = this.el("section", { id: "pareto-panel" });
    section.appendChild(this.el("h2", {}, "Objective space"));
    const classified = this.state.points.filter(
      (p) => p.predicted_hardness !== null && p.predicted_inverse_elasticity !== null,
    );
    if (classified.length === 0) {
      section.appendChild(
        this.el("p", { id: "pareto-placeholder" }, "no predictions yet: run a step first"),
      );
      this.root.appendChild(section);
      return;
    }
    const hs = classified.map((p) => p.predicted_hardness as number);
    const es = classified.map((p) => p.predicted_inverse_elasticity as number);
    const hMin = Math.min(...hs);
    const hMax = Math.max(...hs);
    const eMin = Math.min(...es);
    const eMax = Math.max(...es);
    const width = 420;
    const height = 420;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("id", "pareto-svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    for (const p of classified) {
      const circle = document.createElementNS(SVG_NS, "circle");
      const x =
        hMax > hMin
          ? (((p.predicted_hardness as number) - hMin) / (hMax - hMin)) * (width - 20) + 10
          : width / 2;
      const y =
        eMax > eMin
          ? height -
            ((((p.predicted_inverse_elasticity as number) - eMin) / (eMax - eMin)) *
              (height - 20) +
              10)
          : height / 2;
      circle.setAttribute("cx", String(x));
      circle.setAttribute("cy", String(y));
      circle.setAttribute("r", "3");
      circle.setAttribute("fill", CLASS_COLORS[p.classification] ?? "gray");
      circle.setAttribute("data-id", String(p.id));
      circle.setAttribute("class", `obj ${p.classification}`);
      svg.appendChild(circle);
    }
    section.appendChild(svg);
    this.root.appendChild(section);
  }

  private renderReport(): void {
    const section = this.el("section", { id: "report-panel" });
    section.appendChild(this.el("h2", {}, "Linguistic summary"));
    const report = this.state.report;
    if (!report || !report.markdown) {
      section.appendChild(this.el("p", {}, "no report yet"));
    } else {
      section.appendChild(this.el("pre", { id: "report-markdown" }, report.markdown));
    }
    this.root.appendChild(section);
  }

  private renderMeasurementForm(): void {
    const section = this.el("section", { id: "measurement-panel" });
    section.appendChild(this.el("h2", {}, "Record a measurement"));
    const form = this.el("form", { id: "measurement-form" });
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitMeasurement();
    });

    const field = (id: string, label: string, key: keyof typeof this.formValues) => {
      const wrap = this.el("label", {}, `${label} `);
      const input = this.el("input", { id, type: "text" }) as HTMLInputElement;
      input.value = this.formValues[key];
      input.addEventListener("input", () => {
        this.formValues[key] = input.value;
      });
      wrap.appendChild(input);
      form.appendChild(wrap);
    };
    field("measure-point-id", "point id", "pointId");
    field("measure-hardness", "hardness", "hardness");
    field("measure-ie", "inverse elasticity", "inverseElasticity");
    field("measure-note", "note", "note");
    form.appendChild(this.el("button", { id: "measure-submit", type: "submit" }, "Submit"));
    if (this.state.formError) {
      form.appendChild(
        this.el("p", { id: "measure-error", class: "inline-error" }, this.state.formError),
      );
    }
    section.appendChild(form);
    this.root.appendChild(section);
  }

  private renderOverridePanel(): void {
    const section = this.el("section", { id: "override-panel" });
    section.appendChild(this.el("h2", {}, "Override next evaluation"));
    const selected = this.state.selectedPointId;
    section.appendChild(
      this.el(
        "p",
        { id: "selected-point" },
        selected === null ? "no point selected" : `selected point ${selected}`,
      ),
    );
    const button = this.el(
      "button",
      { id: "override-button" },
      "Override with selected point",
    ) as HTMLButtonElement;
    button.disabled = selected === null;
    button.addEventListener("click", () => void this.overrideSelected());
    section.appendChild(button);
    if (this.state.overrideError) {
      section.appendChild(
        this.el(
          "p",
          { id: "override-error", class: "inline-error" },
          this.state.overrideError,
        ),
      );
    }
    this.root.appendChild(section);
  }

  private renderLog(): void {
    const section = this.el("section", { id: "log-panel" });
    section.appendChild(this.el("h2", {}, "Iteration log"));
    const list = this.el("ul", { id: "log-list" });
    for (const entry of this.state.log) {
      const item = this.el("li", { class: `log-${entry.event}` });
      if (entry.event === "override") {
        const badge = this.el("span", { class: "badge override-badge" }, "human override");
        item.appendChild(badge);
        item.appendChild(
          document.createTextNode(
            ` point ${entry.point_id} at iteration ${entry.iteration}`,
          ),
        );
      } else {
        item.textContent = `${entry.event} (iteration ${entry.iteration})`;
      }
      list.appendChild(item);
    }
    section.appendChild(list);
    this.root.appendChild(section);
  }
}
