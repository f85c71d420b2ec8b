import type { LogEntry, PointView, StatusView } from "../src/types";

export interface Fixture {
  points: PointView[];
  embedding: { id: number; x: number; y: number }[];
  suggestions: number[];
  pendingOverrides: number[];
  measurements: Set<number>;
  log: LogEntry[];
  iteration: number;
  reportMarkdown: string;
}

/** Small campaign snapshot including the walkthrough override candidate. */
export function makeFixture(): Fixture {
  const raw: Array<
    [number, number, number, number, number, number, PointView["classification"], boolean]
  > = [
    // id, pvp10, pvp40, pvp360, speed, dilution, class, sampled
    [0, 1, 0, 0, 1000, 0, "discarded", true],
    [1, 0, 1, 0, 2000, 0.5, "undecided", false],
    [2, 0, 0, 1, 8000, 1, "pareto_optimal", true],
    [3, 0, 1 / 9, 8 / 9, 8000, 0, "undecided", false],
    [4, 0.5, 0.5, 0, 4000, 0.25, "undecided", false],
    [5, 0.25, 0.25, 0.5, 6000, 0.75, "discarded", true],
  ];
  const points: PointView[] = raw.map(
    ([id, p1, p4, p3, speed, dilution, classification, sampled]) => ({
      id,
      c_pvp10: p1,
      c_pvp40: p4,
      c_pvp360: p3,
      spin_speed: speed,
      dilution,
      sampled,
      classification,
      predicted_hardness: 2 + id * 0.7,
      predicted_inverse_elasticity: 1 + id * 0.4,
      region_width: 0.1 * (id + 1),
    }),
  );
  return {
    points,
    embedding: points.map((p) => ({ id: p.id, x: p.id * 1.5, y: (p.id % 3) * 2.0 })),
    suggestions: [1, 4],
    pendingOverrides: [],
    measurements: new Set(points.filter((p) => p.sampled).map((p) => p.id)),
    log: [
      {
        event: "step",
        iteration: 1,
        counts: { undecided: 3, pareto: 1, discarded: 2 },
        suggestions: [1, 4],
      },
    ],
    iteration: 1,
    reportMarkdown:
      "# Linguistic summary: iteration 1\n\n## Some Pareto Optimal Points\n\n" +
      "- Of all design points, some are pareto optimal points. (truth 1.000)\n",
  };
}

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

/** In-memory stand-in for the campaign service, with request recording. */
export class FakeService {
  requests: RecordedRequest[] = [];

  constructor(public fx: Fixture = makeFixture()) {}

  private statusView(): StatusView {
    const counts = { undecided: 0, pareto: 0, discarded: 0 };
    for (const p of this.fx.points) {
      if (p.classification === "pareto_optimal") counts.pareto += 1;
      else if (p.classification === "discarded") counts.discarded += 1;
      else counts.undecided += 1;
    }
    return {
      iteration: this.fx.iteration,
      counts,
      sampled: this.fx.measurements.size,
      grid_size: this.fx.points.length,
      converged: counts.undecided === 0,
      suggestions: this.currentSuggestions(),
      last_report_digest: null,
    };
  }

  private currentSuggestions(): number[] {
    const pending = this.fx.pendingOverrides.filter(
      (id) => !this.fx.measurements.has(id),
    );
    const rest = this.fx.suggestions.filter(
      (id) => !pending.includes(id) && !this.fx.measurements.has(id),
    );
    return [...pending, ...rest];
  }

  private json(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  fetchFn = async (input: string, init?: RequestInit): Promise<Response> => {
    const path = input.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ method, path, body });

    if (method === "GET") {
      switch (path) {
        case "/status":
          return this.json(this.statusView());
        case "/points":
          return this.json({ points: this.fx.points });
        case "/suggestions":
          return this.json({
            suggestions: this.currentSuggestions().map((id) => {
              const p = this.fx.points[id];
              return {
                id: p.id,
                c_pvp10: p.c_pvp10,
                c_pvp40: p.c_pvp40,
                c_pvp360: p.c_pvp360,
                spin_speed: p.spin_speed,
                dilution: p.dilution,
              };
            }),
            converged: false,
          });
        case "/embedding":
          return this.json({ embedding: this.fx.embedding });
        case "/report":
          return this.json({ statements: [], markdown: this.fx.reportMarkdown });
        case "/log":
          return this.json({ log: this.fx.log });
      }
    }
    if (method === "POST" && path === "/measurements") {
      const id = body.point_id as number;
      if (id < 0 || id >= this.fx.points.length) {
        return this.json({ detail: `unknown design point id ${id}` }, 404);
      }
      if (body.hardness <= 0 || body.inverse_elasticity <= 0) {
        return this.json({ detail: "objective values must be finite and positive" }, 400);
      }
      this.fx.measurements.add(id);
      this.fx.points[id].sampled = true;
      return this.json({ ok: true, sampled: this.fx.measurements.size });
    }
    if (method === "POST" && path === "/override") {
      const id = body.point_id as number;
      if (id < 0 || id >= this.fx.points.length) {
        return this.json({ detail: `unknown design point id ${id}` }, 404);
      }
      if (this.fx.measurements.has(id)) {
        return this.json({ detail: `point ${id} is already sampled` }, 400);
      }
      if (!this.fx.pendingOverrides.includes(id)) this.fx.pendingOverrides.push(id);
      this.fx.log.push({ event: "override", iteration: this.fx.iteration, point_id: id });
      return this.json({ ok: true, pending_overrides: this.fx.pendingOverrides });
    }
    return this.json({ detail: `no route for ${method} ${path}` }, 404);
  };
}
