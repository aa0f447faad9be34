import assert from "node:assert/strict";
import { test } from "node:test";

import {
  FrameBuffer,
  parseSpans,
  spanArea,
  spanBounds,
} from "../src/protocol.js";

test("parseSpans reads the debug format", () => {
  const spans = parseSpans("0: 0-4, 7-12\n3: 2-2");
  assert.deepStrictEqual(spans, [
    { y: 0, x0: 0, x1: 4 },
    { y: 0, x0: 7, x1: 12 },
    { y: 3, x0: 2, x1: 2 },
  ]);
  assert.strictEqual(spanArea(spans), 12);
  assert.deepStrictEqual(spanBounds(spans), [0, 0, 12, 3]);
});

test("parseSpans handles negatives and empties", () => {
  assert.deepStrictEqual(parseSpans("-2: -5--3"), [{ y: -2, x0: -5, x1: -3 }]);
  assert.deepStrictEqual(parseSpans(""), []);
  assert.strictEqual(spanBounds([]), null);
  assert.throws(() => parseSpans("junk"));
  assert.throws(() => parseSpans("1: 4"));
});

function solidCrop(w: number, h: number, rgba: number[]): Uint8ClampedArray {
  const out = new Uint8ClampedArray(w * h * 4);
  for (let i = 0; i < w * h; i++) out.set(rgba, i * 4);
  return out;
}

test("applyPatch copies only span pixels", () => {
  const frame = new FrameBuffer(4, 4);
  frame.data.fill(7);
  const crop = solidCrop(2, 2, [1, 2, 3, 4]); // bbox (1,1)-(2,2)
  frame.applyPatch([{ y: 1, x0: 1, x1: 2 }, { y: 2, x0: 2, x1: 2 }], [1, 1, 2, 2], crop);

  const px = (x: number, y: number) =>
    Array.from(frame.data.subarray((y * 4 + x) * 4, (y * 4 + x) * 4 + 4));
  assert.deepStrictEqual(px(1, 1), [1, 2, 3, 4]);
  assert.deepStrictEqual(px(2, 1), [1, 2, 3, 4]);
  assert.deepStrictEqual(px(2, 2), [1, 2, 3, 4]);
  assert.deepStrictEqual(px(1, 2), [7, 7, 7, 7]); // in bbox, not in spans
  assert.deepStrictEqual(px(0, 0), [7, 7, 7, 7]);
});

test("applyPatch clips spans that leave the frame", () => {
  const frame = new FrameBuffer(3, 3);
  const crop = solidCrop(5, 1, [9, 9, 9, 9]); // bbox (-1,0)-(3,0)
  frame.applyPatch([{ y: 0, x0: -1, x1: 3 }], [-1, 0, 3, 0], crop);
  assert.deepStrictEqual(Array.from(frame.data.subarray(0, 12)), [
    9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9, 9,
  ]);
  // row 1 untouched
  assert.strictEqual(frame.data[3 * 4 + 3], 0);
});

test("applyPatch validates crop size", () => {
  const frame = new FrameBuffer(4, 4);
  assert.throws(() =>
    frame.applyPatch([{ y: 0, x0: 0, x1: 1 }], [0, 0, 1, 0], new Uint8ClampedArray(4)),
  );
});

test("round trip: patches reconstruct a frame from the span stream alone", () => {
  // simulate a server frame evolving; the client sees only (spans, crop)
  const w = 8, h = 5;
  const server = new FrameBuffer(w, h);
  const client = new FrameBuffer(w, h);
  let seed = 42;
  const rand = () => (seed = (seed * 1103515245 + 12345) & 0x7fffffff) % 256;

  for (let step = 0; step < 20; step++) {
    const y = rand() % h;
    const x0 = rand() % w;
    const x1 = Math.min(w - 1, x0 + (rand() % 4));
    const color = [rand(), rand(), rand(), 255];
    for (let x = x0; x <= x1; x++) server.data.set(color, (y * w + x) * 4);
    // crop = server frame over the bbox
    const crop = new Uint8ClampedArray((x1 - x0 + 1) * 4);
    crop.set(server.data.subarray((y * w + x0) * 4, (y * w + x1 + 1) * 4));
    client.applyPatch([{ y, x0, x1 }], [x0, y, x1, y], crop);
  }
  assert.ok(client.equals(server));
});

test("FrameBuffer clone and equals", () => {
  const a = new FrameBuffer(2, 2);
  a.data[5] = 77;
  const b = a.clone();
  assert.ok(a.equals(b));
  b.data[5] = 78;
  assert.ok(!a.equals(b));
  assert.ok(!a.equals(new FrameBuffer(2, 3)));
});
