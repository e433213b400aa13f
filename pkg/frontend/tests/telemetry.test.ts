import { describe, expect, it } from "vitest";
import { RingBuffer } from "../src/telemetry.js";

describe("RingBuffer", () => {
  it("keeps samples in order and reports the latest", () => {
    const buf = new RingBuffer(4, 100);
    expect(buf.latest()).toBeUndefined();
    buf.push(0, 1);
    buf.push(1, 2);
    buf.push(2, 3);
    expect(buf.latest()).toBe(3);
    expect(buf.window().map((s) => s.v)).toEqual([1, 2, 3]);
  });

  it("evicts the oldest sample at capacity", () => {
    const buf = new RingBuffer(3, 100);
    for (let i = 0; i < 5; i++) buf.push(i, i * 10);
    expect(buf.size).toBe(3);
    expect(buf.window().map((s) => s.v)).toEqual([20, 30, 40]);
  });

  it("drops samples older than the window", () => {
    const buf = new RingBuffer(10, 30);
    buf.push(0, 1);
    buf.push(20, 2);
    buf.push(45, 3);
    expect(buf.window().map((s) => s.v)).toEqual([2, 3]);
  });

  it("rejects non-positive capacity", () => {
    expect(() => new RingBuffer(0, 30)).toThrow();
  });
});
