/**
 * Inference: run the trained generator over a corpus and emit PFM pairs the
 * primary extractor consumes (NNNN.s0.pfm / NNNN.s1.pfm, values in [0, 1]).
 */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { Corpus, composeInput } from "./corpus.js";
import { loadCheckpoint } from "./model.js";
import { loadPfm, savePfm } from "./pfm.js";

export async function infer(checkpointPath: string, corpus: Corpus,
                            outDir: string): Promise<string[]> {
  const { gen, config } = await loadCheckpoint(checkpointPath);
  if (corpus.width !== config.inputWidth || corpus.height !== config.inputHeight) {
    throw new Error(
      `corpus is ${corpus.width}x${corpus.height} but the checkpoint expects ` +
      `${config.inputWidth}x${config.inputHeight}`);
  }
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const { width: w, height: h } = corpus;

  for (let i = 0; i < corpus.images.length; i++) {
    const image = corpus.images[i];
    const full = loadPfm(image.fullMap);
    const input = composeInput(full, config.inputNoiseSigma, config.seed ^ i);
    const pred = tf.tidy(() => {
      const x = tf.tensor4d(input, [1, h, w, 1]);
      const y = gen.forward(x, false);
      return tf.clipByValue(y, 0, 1);
    });
    const data = pred.dataSync() as Float32Array;
    pred.dispose();

    const s0 = new Float32Array(w * h);
    const s1 = new Float32Array(w * h);
    for (let p = 0; p < w * h; p++) {
      s0[p] = data[2 * p];
      s1[p] = data[2 * p + 1];
    }
    const p0 = path.join(outDir, `${image.id}.s0.pfm`);
    const p1 = path.join(outDir, `${image.id}.s1.pfm`);
    savePfm(p0, { width: w, height: h, values: s0 });
    savePfm(p1, { width: w, height: h, values: s1 });
    written.push(p0, p1);
  }
  gen.dispose();
  return written;
}
