/**
 * Alternating adversarial training.
 *
 * Per batch: one discriminator step (every dEvery-th batch) minimizing
 * -(mean log D(x,y) + mean log(1 - D(x,G(x)))), then one generator step
 * minimizing -mean log D(x,G(x)) + l2Weight * RMS(y - G(x)). Per-epoch means
 * of every term are appended to a CSV loss curve.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { Corpus, Sample, loadSample } from "./corpus.js";
import { Discriminator, Generator, ModelConfig, saveCheckpoint } from "./model.js";
import { PROB_EPS } from "./losses.js";
import { Rng } from "./rng.js";

export interface EpochLog {
  epoch: number;
  gAdv: number;
  dLoss: number;
  l2: number;
  combined: number;
}

export const CSV_HEADER = "epoch,g_adv,d_loss,l2,combined\n";

export function csvLine(log: EpochLog): string {
  return [log.epoch, log.gAdv.toFixed(6), log.dLoss.toFixed(6),
          log.l2.toFixed(6), log.combined.toFixed(6)].join(",") + "\n";
}

function meanLog(p: tf.Tensor, complement: boolean): tf.Scalar {
  const clipped = tf.clipByValue(p, PROB_EPS, 1 - PROB_EPS);
  const inner = complement ? tf.sub(1, clipped) : clipped;
  return tf.mean(tf.log(inner)) as tf.Scalar;
}

function batchTensors(corpus: Corpus, samples: Sample[], indices: number[]):
    { x: tf.Tensor4D; y: tf.Tensor4D } {
  const { width: w, height: h } = corpus;
  const n = indices.length;
  const xData = new Float32Array(n * h * w);
  const yData = new Float32Array(n * h * w * 2);
  indices.forEach((sampleIdx, i) => {
    xData.set(samples[sampleIdx].input, i * h * w);
    yData.set(samples[sampleIdx].target, i * h * w * 2);
  });
  return {
    x: tf.tensor4d(xData, [n, h, w, 1]),
    y: tf.tensor4d(yData, [n, h, w, 2]),
  };
}

export async function train(corpus: Corpus, cfg: ModelConfig, outDir: string,
                            onEpoch?: (log: EpochLog) => void): Promise<EpochLog[]> {
  if (corpus.width !== cfg.inputWidth || corpus.height !== cfg.inputHeight) {
    throw new Error(
      `corpus is ${corpus.width}x${corpus.height} but the model expects ` +
      `${cfg.inputWidth}x${cfg.inputHeight}`);
  }
  if (corpus.images.length === 0) {
    throw new Error("corpus has no images");
  }
  fs.mkdirSync(outDir, { recursive: true });

  const generator = new Generator(cfg);
  const discriminator = new Discriminator(cfg);
  const gVars = generator.variables();
  const dVars = discriminator.variables();
  const gOpt = tf.train.adam(cfg.learningRate, cfg.adamBeta1);
  const dOpt = tf.train.adam(cfg.learningRate, cfg.adamBeta1);

  const samples = corpus.images.map((_, i) =>
    loadSample(corpus, i, cfg.inputNoiseSigma, cfg.seed));
  const shuffler = new Rng(BigInt(cfg.seed) ^ 0xdead5eedn);

  const csvPath = path.join(outDir, "losses.csv");
  fs.writeFileSync(csvPath, CSV_HEADER);
  const logs: EpochLog[] = [];

  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const order = shuffler.shuffle(corpus.images.map((_, i) => i));
    const sums = { gAdv: 0, dLoss: 0, l2: 0, combined: 0 };
    let gSteps = 0;
    let dSteps = 0;

    for (let at = 0, batchIdx = 0; at < order.length; at += cfg.batchSize, batchIdx++) {
      const indices = order.slice(at, at + cfg.batchSize);
      const { x, y } = batchTensors(corpus, samples, indices);

      if (batchIdx % cfg.dEvery === 0) {
        const fake = generator.forward(x, true);
        const dCost = dOpt.minimize(() => {
          const pReal = discriminator.forward(x, y);
          const pFake = discriminator.forward(x, fake);
          return tf.neg(tf.add(meanLog(pReal, false),
                               meanLog(pFake, true))) as tf.Scalar;
        }, true, dVars)!;
        sums.dLoss += dCost.dataSync()[0];
        dSteps++;
        dCost.dispose();
        fake.dispose();
      }

      let parts = { gAdv: 0, l2: 0 };
      const gCost = gOpt.minimize(() => {
        const fake = generator.forward(x, true);
        const pFake = discriminator.forward(x, fake);
        const gAdv = tf.neg(meanLog(pFake, false)) as tf.Scalar;
        const l2 = tf.sqrt(tf.mean(tf.square(tf.sub(y, fake)))) as tf.Scalar;
        parts = { gAdv: gAdv.dataSync()[0], l2: l2.dataSync()[0] };
        return tf.add(gAdv, tf.mul(cfg.l2Weight, l2)) as tf.Scalar;
      }, true, gVars)!;
      sums.gAdv += parts.gAdv;
      sums.l2 += parts.l2;
      sums.combined += gCost.dataSync()[0];
      gSteps++;
      gCost.dispose();
      x.dispose();
      y.dispose();
    }

    const log: EpochLog = {
      epoch,
      gAdv: sums.gAdv / gSteps,
      dLoss: dSteps ? sums.dLoss / dSteps : NaN,
      l2: sums.l2 / gSteps,
      combined: sums.combined / gSteps,
    };
    logs.push(log);
    fs.appendFileSync(csvPath, csvLine(log));
    onEpoch?.(log);
  }

  await saveCheckpoint(path.join(outDir, "checkpoint.json"), generator);
  generator.dispose();
  discriminator.dispose();
  return logs;
}
