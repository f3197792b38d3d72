import { describe, expect, it } from "vitest";

import {
  decodeState,
  defaultState,
  encodeState,
  sanitize,
  type ViewState,
} from "../src/state";

const KEYS = ["2", "3", "4", "5", "6", "7", "8"];

describe("view state url codec", () => {
  it("default state encodes to an empty fragment", () => {
    expect(encodeState(defaultState(KEYS), KEYS)).toBe("");
  });

  it("round-trips every field", () => {
    const state: ViewState = {
      visible: ["2", "4", "8"],
      selected: { iteration: "4", group: 2 },
      hovered: { from: "2", fromGroup: 0, to: "4", toGroup: 1 },
      violinChannel: "split",
      colorMode: "by_archetype",
      projection: "tsne",
      sizeAttribute: "uniform",
      threshold: 5,
    };
    const url = encodeState(state, KEYS);
    expect(decodeState(url, KEYS)).toEqual(state);
  });

  it("round-trips eps-style keys containing dots", () => {
    const keys = ["0.05", "0.3", "0.55"];
    const state: ViewState = {
      ...defaultState(keys),
      selected: { iteration: "0.3", group: 1 },
      hovered: { from: "0.05", fromGroup: -1, to: "0.3", toGroup: 2 },
    };
    const decoded = decodeState(encodeState(state, keys), keys);
    expect(decoded.selected).toEqual({ iteration: "0.3", group: 1 });
    expect(decoded.hovered).toEqual({ from: "0.05", fromGroup: -1, to: "0.3", toGroup: 2 });
  });

  it("round-trips seed-style keys containing dashes and noise groups", () => {
    const keys = ["seed-1", "seed-2", "seed-3"];
    const state: ViewState = {
      ...defaultState(keys),
      hovered: { from: "seed-1", fromGroup: -1, to: "seed-2", toGroup: -1 },
    };
    const decoded = decodeState(encodeState(state, keys), keys);
    expect(decoded.hovered).toEqual(state.hovered);
  });

  it("drops a selection pointing at a hidden iteration", () => {
    const dirty: ViewState = {
      ...defaultState(KEYS),
      visible: ["2", "3"],
      selected: { iteration: "8", group: 0 },
    };
    expect(sanitize(dirty, KEYS).selected).toBeNull();
  });

  it("restores all axes when fewer than two visible keys survive", () => {
    const dirty: ViewState = { ...defaultState(KEYS), visible: ["nope"] };
    expect(sanitize(dirty, KEYS).visible).toEqual(KEYS);
  });

  it("keeps visible keys in run order regardless of input order", () => {
    const dirty: ViewState = { ...defaultState(KEYS), visible: ["8", "2", "5"] };
    expect(sanitize(dirty, KEYS).visible).toEqual(["2", "5", "8"]);
  });

  it("ignores junk fragments", () => {
    expect(decodeState("#v=&th=x&sel=broken&noise", KEYS)).toEqual(defaultState(KEYS));
    expect(decodeState("", KEYS)).toEqual(defaultState(KEYS));
  });

  it("rejects thresholds below the sweep floor", () => {
    expect(decodeState("#th=1", KEYS).threshold).toBeNull();
    expect(decodeState("#th=2", KEYS).threshold).toBe(2);
  });
});
