/**
 * Typed client over the run service. All calls are plain JSON over HTTP;
 * nothing is computed client-side that the engine already serves.
 *
 * Cancellation: each call carries a view tag, and a newer call with the
 * same tag aborts the one in flight, so a slow response can never
 * overwrite the state a faster, newer one produced.
 */

export interface MetricEntry {
  value: number | null;
  direction: "higher_better" | "lower_better";
}

export interface RunSummary {
  manifest: {
    status: string;
    method: string;
    sweep_param: string;
    n_items: number;
    iteration_keys: string[];
    failures: [string, string][];
    run_digest: string;
    [extra: string]: unknown;
  };
  metrics: Record<string, Record<string, MetricEntry>>;
  directions: Record<string, string>;
  visible: string[];
}

export interface GroupInfo {
  group_id: number;
  label: string;
  size: number;
  is_noise: boolean;
  metrics: Record<string, number>;
}

export interface IterationPayload {
  iteration_key: string;
  param_value: number;
  item_ids: string[];
  assignments: number[];
  membership: number[];
  outlier: number[];
  groups: GroupInfo[];
}

export interface TransitionPayload {
  from: string;
  to: string;
  from_group_ids: number[];
  to_group_ids: number[];
  counts: number[][];
}

export interface EmbeddingRow {
  iteration: string;
  group: number;
  x: number;
  y: number;
  x1d: number;
  color: string;
  archetype: number;
  is_noise: boolean;
  size_value: number;
}

export interface EmbeddingPayload {
  method: string;
  color_mode: string;
  rows: EmbeddingRow[];
  axis_orders: Record<string, number[]>;
  archetype_colors: Record<string, string>;
}

export interface ViolinPayload {
  channel: string;
  violins: {
    iteration: string;
    group: number;
    channel: string;
    grid: number[];
    density: number[];
    width_scale: number;
    median: number;
    q1: number;
    q3: number;
    render_as_bar: boolean;
  }[];
}

export interface ArchetypePayload {
  threshold: number;
  default_threshold: number;
  n_archetypes: number;
  noise_pct: number;
  labels: { iteration: string; group: number; archetype: number }[];
  centroids: Record<string, number[]>;
  complete_iterations: string[];
  noise_archetype_ids: number[];
  probabilities: number[];
  archetype_colors: Record<string, string>;
}

export interface SweepCurve {
  curve: { threshold: number; n_archetypes: number; noise_pct: number }[];
}

export interface VisibilityPayload {
  visible: string[];
  pairs: [string, string][];
}

export interface ClassPayload {
  id: string;
  name: string;
  labels: string[];
  counts: Record<string, number>;
  csv_url: string;
}

export interface TermCloudPayload {
  class_label: string;
  mode: string;
  /** term -> weight; negative weights only in difference clouds */
  entries: Record<string, number>;
}

export interface WordcloudPayload {
  mode: string;
  clouds: (
    | TermCloudPayload
    | { cloud: TermCloudPayload; from: string; to: string; lost: string[]; gained: string[] }
  )[];
}

export type ClassSpec =
  | { kind: "full"; iteration: string }
  | { kind: "transition"; from: string; to: string; source: number }
  | { kind: "connector"; from: string; to: string; a: number; b: number };

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(
    private base: string,
    private fetchFn: FetchLike = fetch,
  ) {}

  /** Absolute URL for a class CSV download link. */
  classCsvUrl(id: string): string {
    return `${this.base}/class/${id}.csv`;
  }

  private async request<T>(tag: string, path: string, init?: RequestInit): Promise<T> {
    this.inflight.get(tag)?.abort();
    const controller = new AbortController();
    this.inflight.set(tag, controller);
    let response: Response;
    try {
      response = await this.fetchFn(`${this.base}${path}`, {
        ...init,
        signal: controller.signal,
      });
    } finally {
      if (this.inflight.get(tag) === controller) this.inflight.delete(tag);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(tag: string, path: string, body: unknown): Promise<T> {
    return this.request<T>(tag, path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  run(): Promise<RunSummary> {
    return this.request("run", "/run");
  }

  iteration(key: string): Promise<IterationPayload> {
    return this.request(`iteration:${key}`, `/iterations/${encodeURIComponent(key)}`);
  }

  transitions(from: string, to: string): Promise<TransitionPayload> {
    return this.request(
      `transitions:${from}~${to}`,
      `/transitions?from=${encodeURIComponent(from)}&to=${encodeURIComponent(to)}`,
    );
  }

  embedding(method: string, mode: string): Promise<EmbeddingPayload> {
    return this.request(
      "embedding",
      `/embedding?method=${encodeURIComponent(method)}&mode=${encodeURIComponent(mode)}`,
    );
  }

  violins(channel: string): Promise<ViolinPayload> {
    return this.request("violins", `/violins?channel=${encodeURIComponent(channel)}`);
  }

  archetypes(ignoreNoise = false): Promise<ArchetypePayload> {
    return this.request("archetypes", `/archetypes?ignore_noise=${ignoreNoise}`);
  }

  archetypeSweep(): Promise<SweepCurve> {
    return this.request("sweep", "/archetypes/sweep");
  }

  setThreshold(value: number): Promise<ArchetypePayload> {
    return this.post("archetypes", "/archetypes/threshold", { value });
  }

  setVisibility(keys: string[]): Promise<VisibilityPayload> {
    return this.post("visibility", "/visibility", { keys });
  }

  createClass(spec: ClassSpec): Promise<ClassPayload> {
    return this.post("class", "/class", spec);
  }

  wordclouds(classId: string, mode: string): Promise<WordcloudPayload> {
    return this.request(
      "wordclouds",
      `/wordclouds?class=${encodeURIComponent(classId)}&mode=${encodeURIComponent(mode)}`,
    );
  }
}
