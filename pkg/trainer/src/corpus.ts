/**
 * Corpus access. Consumes the layout written by `softtext synth`:
 * manifest.json plus maps/NNNN.s0.pfm / NNNN.s1.pfm label pairs.
 *
 * The model input is a degraded geometric rendering derived from the clean
 * labels: the box support (full map > 0) as a flat mask plus per-pixel
 * Gaussian noise, seeded by (seed XOR image index) so every sample is
 * reproducible in isolation.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { Rng } from "./rng.js";
import { FloatMap, loadPfm } from "./pfm.js";

export interface CorpusImage {
  id: string;
  fullMap: string;
  shrunkMap: string;
}

export interface Corpus {
  root: string;
  width: number;
  height: number;
  images: CorpusImage[];
}

export interface Sample {
  /** 1-channel input, length w*h */
  input: Float32Array;
  /** 2-channel target (full map then shrunk map), length w*h*2, HWC order */
  target: Float32Array;
}

export function loadCorpus(root: string): Corpus {
  const manifestPath = path.join(root, "manifest.json");
  const manifest = JSON.parse(fs.readFileSync(manifestPath, "utf-8"));
  const images: CorpusImage[] = manifest.images.map((entry: any) => ({
    id: entry.id,
    fullMap: path.join(root, entry.maps.full),
    shrunkMap: path.join(root, entry.maps.shrunk),
  }));
  return { root, width: manifest.width, height: manifest.height, images };
}

export function composeInput(fullMap: FloatMap, noiseSigma: number,
                             seed: number): Float32Array {
  const rng = new Rng(BigInt(seed));
  const input = new Float32Array(fullMap.values.length);
  for (let i = 0; i < input.length; i++) {
    const mask = fullMap.values[i] > 0 ? 1 : 0;
    input[i] = mask + (noiseSigma > 0 ? noiseSigma * rng.normal() : 0);
  }
  return input;
}

export function loadSample(corpus: Corpus, index: number, noiseSigma: number,
                           seed: number): Sample {
  const image = corpus.images[index];
  const full = loadPfm(image.fullMap);
  const shrunk = loadPfm(image.shrunkMap);
  if (full.width !== corpus.width || full.height !== corpus.height ||
      shrunk.width !== full.width || shrunk.height !== full.height) {
    throw new Error(`map dimensions disagree for image ${image.id}`);
  }
  const input = composeInput(full, noiseSigma, seed ^ index);
  const target = new Float32Array(full.values.length * 2);
  for (let i = 0; i < full.values.length; i++) {
    target[2 * i] = full.values[i];
    target[2 * i + 1] = shrunk.values[i];
  }
  return { input, target };
}
