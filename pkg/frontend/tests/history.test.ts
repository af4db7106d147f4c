import { describe, expect, it } from "vitest";

import { HistoryStack } from "../src/history.js";

const clone = (v: number[]) => [...v];

describe("HistoryStack", () => {
  it("undo restores the prior snapshot exactly", () => {
    const h = new HistoryStack<number[]>(clone);
    h.push([1, 2, 3]);
    h.push([4, 5, 6]);
    expect(h.undo()).toEqual([1, 2, 3]);
  });

  it("undo and redo are exact inverses", () => {
    const h = new HistoryStack<number[]>(clone);
    const states = [[0], [1], [2], [3]];
    states.forEach((s) => h.push(s));
    expect(h.undo()).toEqual([2]);
    expect(h.undo()).toEqual([1]);
    expect(h.redo()).toEqual([2]);
    expect(h.redo()).toEqual([3]);
    expect(h.redo()).toBeNull();
  });

  it("supports undo to any prior state", () => {
    const h = new HistoryStack<number[]>(clone);
    for (let i = 0; i < 10; i++) h.push([i]);
    expect(h.jumpTo(0)).toEqual([0]);
    expect(h.canUndo()).toBe(false);
    expect(h.canRedo()).toBe(true);
  });

  it("push truncates the redo tail", () => {
    const h = new HistoryStack<number[]>(clone);
    h.push([1]);
    h.push([2]);
    h.undo();
    h.push([9]);
    expect(h.canRedo()).toBe(false);
    expect(h.current()).toEqual([9]);
    expect(h.undo()).toEqual([1]);
  });

  it("snapshots are isolated from later mutation", () => {
    const h = new HistoryStack<number[]>(clone);
    const live = [1, 2];
    h.push(live);
    live[0] = 99;
    expect(h.current()).toEqual([1, 2]);
    const out = h.current();
    out[1] = 42;
    expect(h.current()).toEqual([1, 2]);
  });

  it("bounds the stored history", () => {
    const h = new HistoryStack<number[]>(clone, 5);
    for (let i = 0; i < 12; i++) h.push([i]);
    expect(h.size()).toBe(5);
    expect(h.current()).toEqual([11]);
  });
});
