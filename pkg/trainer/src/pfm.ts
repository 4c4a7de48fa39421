/**
 * Single-channel PFM rasters, the score-map interchange contract.
 *
 * Layout: "Pf\n{w} {h}\n{scale}\n" then raw 32-bit floats, rows stored
 * bottom-to-top. Negative scale marks little-endian payload. Arrays here are
 * row-major top-to-bottom Float32Array of length width * height.
 */

import * as fs from "node:fs";

export interface FloatMap {
  width: number;
  height: number;
  values: Float32Array;
}

export function encodePfm(map: FloatMap): Buffer {
  const { width, height, values } = map;
  if (values.length !== width * height) {
    throw new Error(`value count ${values.length} != ${width}x${height}`);
  }
  const header = Buffer.from(`Pf\n${width} ${height}\n-1.0\n`, "ascii");
  const payload = Buffer.alloc(width * height * 4);
  for (let y = 0; y < height; y++) {
    const srcRow = height - 1 - y; // bottom-to-top
    for (let x = 0; x < width; x++) {
      payload.writeFloatLE(values[srcRow * width + x], (y * width + x) * 4);
    }
  }
  return Buffer.concat([header, payload]);
}

function nextToken(data: Buffer, pos: number): [string, number] {
  let end = pos;
  while (end < data.length && !" \t\r\n".includes(String.fromCharCode(data[end]))) {
    end++;
  }
  if (end === pos || end >= data.length) {
    throw new Error(`truncated PFM header at byte ${end}`);
  }
  return [data.subarray(pos, end).toString("ascii"), end + 1];
}

export function decodePfm(data: Buffer): FloatMap {
  const [magic, p1] = nextToken(data, 0);
  if (magic !== "Pf") {
    throw new Error(`bad PFM magic ${JSON.stringify(magic)}; expected single-channel "Pf"`);
  }
  const [wTok, p2] = nextToken(data, p1);
  const [hTok, p3] = nextToken(data, p2);
  const [scaleTok, payloadAt] = nextToken(data, p3);
  const width = parseInt(wTok, 10);
  const height = parseInt(hTok, 10);
  const scale = parseFloat(scaleTok);
  if (!(width > 0 && height > 0) || Number.isNaN(scale) || scale === 0) {
    throw new Error(`bad PFM header ${wTok} ${hTok} ${scaleTok}`);
  }
  const expected = width * height * 4;
  if (data.length - payloadAt !== expected) {
    throw new Error(`payload is ${data.length - payloadAt} bytes, expected ${expected}`);
  }
  const littleEndian = scale < 0;
  const values = new Float32Array(width * height);
  for (let y = 0; y < height; y++) {
    const dstRow = height - 1 - y;
    for (let x = 0; x < width; x++) {
      const off = payloadAt + (y * width + x) * 4;
      values[dstRow * width + x] = littleEndian
        ? data.readFloatLE(off)
        : data.readFloatBE(off);
    }
  }
  return { width, height, values };
}

export function loadPfm(path: string): FloatMap {
  return decodePfm(fs.readFileSync(path));
}

export function savePfm(path: string, map: FloatMap): void {
  fs.writeFileSync(path, encodePfm(map));
}
