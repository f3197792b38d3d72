import { afterAll, beforeAll, describe, expect, inject, it } from "vitest";

import { ApiClient } from "../src/api";
import { App, type Viewport } from "../src/app";
import { pairKey } from "../src/sankey";
import { diffScene } from "../src/scene";
import { resetServer } from "./helpers";

const base = inject("blobBase");

describe("view state round trip through the URL fragment", () => {
  beforeAll(async () => {
    await resetServer(base);
  });

  afterAll(async () => {
    await resetServer(base);
  });

  it("reloading the serialized state reproduces the scene graph exactly", async () => {
    const app1 = new App(new ApiClient(base));
    await app1.init();

    // walk the view well away from the defaults, all through the live service
    const middle = app1.runKeys[Math.floor(app1.runKeys.length / 2)]!;
    await app1.toggleAxis(middle); // hidden axis with bridged bands
    await app1.setThreshold(4); // non-default archetype model
    await app1.setViolinChannel("split"); // violins instead of bars
    await app1.setProjection("tsne"); // non-default layout
    const sel = app1.state.visible[0]!;
    const selGid = app1.iterations.get(sel)!.groups[0]!.group_id;
    app1.select(sel, selGid);

    // hover a connector that actually carries items
    const [from, to] = app1.pairs[0]!;
    const matrix = app1.transitions.get(pairKey(from, to))!;
    outer: for (let i = 0; i < matrix.from_group_ids.length; i++) {
      for (let j = 0; j < matrix.to_group_ids.length; j++) {
        if (matrix.counts[i]![j]! > 0) {
          app1.hover({
            from,
            fromGroup: matrix.from_group_ids[i]!,
            to,
            toGroup: matrix.to_group_ids[j]!,
          });
          break outer;
        }
      }
    }
    expect(app1.state.hovered).not.toBeNull();
    expect(app1.staleBanner).toBeNull();

    const url = app1.urlFragment();
    expect(url).toContain("th=4");
    expect(url).toContain("ch=split");
    expect(url).toContain("pm=tsne");

    const app2 = new App(new ApiClient(base));
    await app2.init(url);

    const viewports: Viewport[] = [
      { width: 1280, height: 720, zoom: 1, dpr: 1 },
      { width: 1440, height: 810, zoom: 1.7, dpr: 2 },
    ];
    for (const vp of viewports) {
      expect(diffScene(app1.scene(vp), app2.scene(vp))).toEqual([]);
    }
    // and the reloaded app serializes right back to the same fragment
    expect(app2.urlFragment()).toBe(url);
  });

  it("the default boot state serializes to an empty fragment and round-trips", async () => {
    await resetServer(base);
    const app1 = new App(new ApiClient(base));
    await app1.init();
    expect(app1.urlFragment()).toBe("");

    const app2 = new App(new ApiClient(base));
    await app2.init(app1.urlFragment());
    expect(diffScene(app1.scene(), app2.scene())).toEqual([]);
  });
});
