/**
 * The controller: owns the ViewState, keeps a cache of server payloads,
 * and rebuilds the scene from (state, cache) on demand. Every mutation
 * goes through the API first; the scene is a pure function of what came
 * back, which is what lets a reloaded URL reproduce the view exactly.
 */

import {
  ApiClient,
  type ArchetypePayload,
  type EmbeddingPayload,
  type IterationPayload,
  type RunSummary,
  type SweepCurve,
  type TransitionPayload,
  type ViolinPayload,
  type WordcloudPayload,
} from "./api";
import {
  adjacentPairs,
  shareColors,
  showTransitions,
  similarityOf,
  transitionDetails,
  type ActiveClass,
} from "./classes";
import { buildEmbedding } from "./embedding";
import { buildMetricsChart } from "./metrics";
import { buildSankey, pairKey, type SankeyData } from "./sankey";
import { group, node, type SceneNode } from "./scene";
import {
  decodeState,
  defaultState,
  encodeState,
  sanitize,
  type ViewState,
} from "./state";
import { buildThresholdPanel } from "./threshold";
import { buildWordclouds, type CloudOrdering } from "./wordcloud";

export interface Viewport {
  width: number;
  height: number;
  zoom: number;
  dpr: number;
}

export const DEFAULT_VIEWPORT: Viewport = { width: 1280, height: 720, zoom: 1, dpr: 1 };

export class App {
  state!: ViewState;
  summary!: RunSummary;
  iterations = new Map<string, IterationPayload>();
  embedding!: EmbeddingPayload;
  archetypes!: ArchetypePayload;
  sweep!: SweepCurve;
  pairs: [string, string][] = [];
  transitions = new Map<string, TransitionPayload>();
  violins: ViolinPayload | null = null;
  activeClass: ActiveClass | null = null;
  wordclouds: WordcloudPayload | null = null;
  cloudOrdering: CloudOrdering = "label";
  /** set when a refresh failed and the view is showing stale data */
  staleBanner: string | null = null;

  constructor(readonly api: ApiClient) {}

  get runKeys(): string[] {
    return this.summary.manifest.iteration_keys;
  }

  /** Boot from a URL fragment ("" = defaults). One pass, no redundant calls. */
  async init(fragment = ""): Promise<void> {
    this.summary = await this.api.run();
    this.state = fragment
      ? decodeState(fragment, this.runKeys)
      : defaultState(this.runKeys);

    if (this.state.threshold !== null) {
      this.archetypes = await this.api.setThreshold(this.state.threshold);
    } else {
      this.archetypes = await this.api.archetypes();
    }
    this.sweep = await this.api.archetypeSweep();

    const vis = await this.api.setVisibility(this.state.visible);
    this.state.visible = vis.visible;
    this.pairs = vis.pairs;

    this.embedding = await this.api.embedding(this.state.projection, this.state.colorMode);
    await this.loadIterations(this.state.visible);
    await this.loadTransitions();
    if (this.state.violinChannel !== "off") {
      this.violins = await this.api.violins(this.state.violinChannel);
    }
  }

  private async loadIterations(keys: string[]): Promise<void> {
    for (const key of keys) {
      if (!this.iterations.has(key)) {
        this.iterations.set(key, await this.api.iteration(key));
      }
    }
  }

  private async loadTransitions(): Promise<void> {
    for (const [a, b] of this.pairs) {
      const key = pairKey(a, b);
      if (!this.transitions.has(key)) {
        this.transitions.set(key, await this.api.transitions(a, b));
      }
    }
  }

  urlFragment(): string {
    return encodeState(this.state, this.runKeys);
  }

  // --- mutations (API first, then state) --------------------------------

  /**
   * One POST; completeness and archetype colors come from the response.
   * Nothing else is refetched, so dot colors cannot move.
   */
  async setThreshold(value: number): Promise<void> {
    try {
      this.archetypes = await this.api.setThreshold(value);
      this.state.threshold = this.archetypes.threshold;
      this.staleBanner = null;
    } catch (err) {
      // 422: out of range; keep the old model, the spinner snaps back on rebuild
      this.staleBanner = err instanceof Error ? err.message : String(err);
    }
  }

  async toggleAxis(key: string): Promise<void> {
    const next = this.state.visible.includes(key)
      ? this.state.visible.filter((k) => k !== key)
      : this.runKeys.filter((k) => this.state.visible.includes(k) || k === key);
    if (next.length < 2) return; // the service rejects it anyway
    try {
      const vis = await this.api.setVisibility(next);
      this.state.visible = vis.visible;
      this.pairs = vis.pairs;
      this.state = sanitize(this.state, this.runKeys);
      await this.loadIterations(this.state.visible);
      await this.loadTransitions();
      if (this.state.violinChannel !== "off") {
        // the violin payload is filtered to visible iterations server-side
        this.violins = await this.api.violins(this.state.violinChannel);
      }
      this.staleBanner = null;
    } catch (err) {
      this.staleBanner = err instanceof Error ? err.message : String(err);
    }
  }

  async setProjection(method: string): Promise<void> {
    // positions change, colors are shared with the old layout by contract
    this.embedding = await this.api.embedding(method, this.state.colorMode);
    this.state.projection = method;
  }

  async setColorMode(mode: "by_item" | "by_archetype"): Promise<void> {
    this.embedding = await this.api.embedding(this.state.projection, mode);
    this.state.colorMode = mode;
  }

  async setViolinChannel(channel: ViewState["violinChannel"]): Promise<void> {
    this.state.violinChannel = channel;
    this.violins = channel === "off" ? null : await this.api.violins(channel);
  }

  setSizeAttribute(name: string): void {
    this.state.sizeAttribute = name;
  }

  /** Clicking the selected group again clears the selection. */
  select(iteration: string, groupId: number): void {
    const cur = this.state.selected;
    this.state.selected =
      cur && cur.iteration === iteration && cur.group === groupId
        ? null
        : { iteration, group: groupId };
    this.state = sanitize(this.state, this.runKeys);
  }

  hover(conn: ViewState["hovered"]): void {
    this.state.hovered = conn;
    this.state = sanitize(this.state, this.runKeys);
  }

  // --- class propagation (the bar context menu) --------------------------

  /** "Share colors": one class labeling every member by its group here. */
  async shareColorsFor(iteration: string): Promise<void> {
    await this.adoptClass(() => shareColors(this.api, iteration, this.runKeys));
  }

  /**
   * "Show transitions from/to": the group's members labeled by their
   * counterpart group on the next (or previous) visible axis.
   */
  async transitionClass(
    iteration: string,
    gid: number,
    direction: "from" | "to",
  ): Promise<void> {
    const adj = adjacentPairs(iteration, this.pairs);
    const other = direction === "from" ? adj.after : adj.before;
    if (!other) return; // edge axis, nothing on that side
    await this.adoptClass(() =>
      showTransitions(this.api, iteration, other, gid, this.runKeys),
    );
  }

  /** "Show transition details": left only / shared / right only / other. */
  async connectorDetails(conn: NonNullable<ViewState["hovered"]>): Promise<void> {
    await this.adoptClass(() =>
      transitionDetails(this.api, conn.from, conn.fromGroup, conn.to, conn.toGroup, this.runKeys),
    );
  }

  /** The hovered connector, if it touches this bar; for the bar menu. */
  connectorFromBar(iteration: string, gid: number): ViewState["hovered"] {
    const h = this.state.hovered;
    if (
      h &&
      ((h.from === iteration && h.fromGroup === gid) ||
        (h.to === iteration && h.toGroup === gid))
    ) {
      return h;
    }
    return null;
  }

  clearClass(): void {
    this.activeClass = null;
    this.wordclouds = null;
  }

  private async adoptClass(create: () => Promise<ActiveClass>): Promise<void> {
    try {
      this.activeClass = await create();
      this.staleBanner = null;
    } catch (err) {
      this.staleBanner = err instanceof Error ? err.message : String(err);
    }
  }

  async loadWordclouds(classId: string, mode: string): Promise<void> {
    this.wordclouds = await this.api.wordclouds(classId, mode);
  }

  setCloudOrdering(ordering: CloudOrdering): void {
    this.cloudOrdering = ordering;
  }

  // --- scene -------------------------------------------------------------

  scene(vp: Viewport = DEFAULT_VIEWPORT): SceneNode {
    const sankeyData: SankeyData = {
      runKeys: this.runKeys,
      iterations: this.iterations,
      embedding: this.embedding,
      pairs: this.pairs,
      transitions: this.transitions,
      violins: this.state.violinChannel === "off" ? null : this.violins,
      classColors: this.activeClass?.groupColors ?? null,
    };
    const half = { width: vp.width / 2, height: vp.height / 2 };
    const children = [
      buildMetricsChart(this.summary, this.archetypes.complete_iterations, half),
      buildSankey(sankeyData, this.state, {
        width: vp.width,
        height: vp.height / 2,
        zoom: vp.zoom,
        dpr: vp.dpr,
      }),
      buildEmbedding(
        this.embedding,
        this.state,
        this.pairs,
        this.transitions,
        this.activeClass?.groupColors ?? null,
        half,
      ),
      buildThresholdPanel(this.archetypes, this.sweep, { width: half.width, height: 160 }),
    ];
    if (this.wordclouds) {
      const ctx = this.activeClass
        ? {
            docCounts: new Map(Object.entries(this.activeClass.counts)),
            similarity: similarityOf(this.activeClass.labels, this.embedding),
          }
        : {};
      children.push(buildWordclouds(this.wordclouds, this.cloudOrdering, ctx));
    }
    if (this.staleBanner !== null) {
      children.push(
        group(
          "stale-banner",
          [
            node(
              "text",
              {
                x: 12,
                y: 16,
                text: `stale view: ${this.staleBanner}`,
                fill: "#8a6d1a",
                anchor: "start",
              },
              "stale-banner-text",
            ),
          ],
          { message: this.staleBanner, role: "alert" },
        ),
      );
    }
    return group("root", children, {
      method: this.summary.manifest.method,
      sweep_param: this.summary.manifest.sweep_param,
    });
  }
}
