/**
 * Reference loss values, kept numerically in lockstep with the primary
 * toolkit's `softtext loss` subcommand (the parity tests hold both to 1e-5).
 * Plain-number implementations; the training graph recomputes the same
 * quantities with tensors.
 */

export const PROB_EPS = 1e-7;

function clamp01(p: number): number {
  return Math.min(Math.max(p, PROB_EPS), 1 - PROB_EPS);
}

function meanLog(values: ArrayLike<number>, f: (p: number) => number): number {
  if (values.length === 0) throw new Error("empty score array");
  let acc = 0;
  for (let i = 0; i < values.length; i++) acc += Math.log(f(clamp01(values[i])));
  return acc / values.length;
}

/** RMS-normalized Euclidean distance between prediction and target. */
export function l2Term(pred: ArrayLike<number>, gt: ArrayLike<number>): number {
  if (pred.length !== gt.length) {
    throw new Error(`size ${pred.length} vs ${gt.length}`);
  }
  let acc = 0;
  for (let i = 0; i < pred.length; i++) {
    const d = gt[i] - pred[i];
    acc += d * d;
  }
  return Math.sqrt(acc) / Math.sqrt(pred.length);
}

/** Discriminator loss: -(mean log D(real) + mean log(1 - D(fake))). */
export function dLoss(onReal: ArrayLike<number>, onFake: ArrayLike<number>): number {
  return -(meanLog(onReal, (p) => p) + meanLog(onFake, (p) => 1 - p));
}

/** Generator adversarial loss, non-saturating by default. */
export function gLoss(onFake: ArrayLike<number>, nonSaturating = true): number {
  if (nonSaturating) return -meanLog(onFake, (p) => p);
  return meanLog(onFake, (p) => 1 - p);
}

export function combinedObjective(gAdv: number, l2: number, l2Weight: number): number {
  return gAdv + l2Weight * l2;
}
