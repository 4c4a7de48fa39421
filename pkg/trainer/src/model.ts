/**
 * Generator and discriminator, built from raw ops.
 *
 * Generator: 4-stage encoder (3x3 convs + max-pool) with per-stage skips, a
 * decoder that upsamples by bilinear interpolation (no transposed
 * convolutions) and fuses skips by addition, decoder dropout as the
 * stochastic input, and a sigmoid head with 2 channels (full and shrunk map)
 * at input resolution.
 *
 * Discriminator: the 1-channel input concatenated with the 2-channel score
 * pair through a stack of stride-2 convolutions into a patch probability map.
 *
 * Convolutions use a custom gradient because the WASM backend ships no
 * Conv2DBackpropFilter kernel: the input gradient is conv2dTranspose and the
 * filter gradient is a batch<->channel transposed convolution with dilation
 * equal to the forward stride, all composed from registered kernels.
 */

import * as fs from "node:fs";

import * as tf from "@tensorflow/tfjs";

export interface ModelConfig {
  inputWidth: number;
  inputHeight: number;
  baseWidth: number;      // channels at full resolution; doubles per stage
  dropout: number;        // decoder dropout rate, the z realization
  l2Weight: number;       // weight of the reconstruction term
  learningRate: number;
  adamBeta1: number;
  batchSize: number;
  epochs: number;
  dEvery: number;         // train the discriminator every n-th batch
  inputNoiseSigma: number;
  seed: number;
}

export const DEFAULT_CONFIG: ModelConfig = {
  inputWidth: 128,
  inputHeight: 128,
  baseWidth: 16,
  dropout: 0.5,
  l2Weight: 100,
  learningRate: 2e-4,
  adamBeta1: 0.5,
  batchSize: 8,
  epochs: 50,
  dEvery: 1,
  inputNoiseSigma: 0.1,
  seed: 1,
};

function convBackpropFilter(x: tf.Tensor4D, dy: tf.Tensor4D,
                            filterShape: [number, number, number, number],
                            stride: number): tf.Tensor4D {
  const info = tf.backend_util.computeConv2DInfo(
    x.shape, filterShape, [stride, stride], [1, 1], "same");
  const { top, bottom, left, right } = info.padInfo;
  const xT = tf.transpose(x, [3, 1, 2, 0]);               // [CI, H, W, B]
  const xTp = tf.pad(xT, [[0, 0], [top, bottom], [left, right], [0, 0]]);
  const dyT = tf.transpose(dy, [1, 2, 0, 3]);             // [OH, OW, B, CO]
  const r = tf.conv2d(xTp as tf.Tensor4D, dyT as tf.Tensor4D, 1, "valid",
                      "NHWC", [stride, stride]);          // [CI, KH, KW, CO]
  return tf.transpose(r, [1, 2, 0, 3]) as tf.Tensor4D;    // [KH, KW, CI, CO]
}

function makeConvOp(stride: number) {
  return tf.customGrad((...args) => {
    const [xt, wt] = args.slice(0, 2) as [tf.Tensor4D, tf.Tensor4D];
    const save = args[args.length - 1] as tf.GradSaveFunc;
    save([xt, wt]);
    const value = tf.conv2d(xt, wt, stride, "same");
    const gradFunc = (dy: tf.Tensor, saved: tf.Tensor[]) => {
      const [sx, sw] = saved as [tf.Tensor4D, tf.Tensor4D];
      return [
        tf.conv2dTranspose(dy as tf.Tensor4D, sw, sx.shape, stride, "same"),
        convBackpropFilter(sx, dy as tf.Tensor4D,
                           sw.shape as [number, number, number, number], stride),
      ];
    };
    return { value, gradFunc };
  });
}

const conv1 = makeConvOp(1);
const conv2 = makeConvOp(2);

export interface ConvParams {
  w: tf.Variable;
  b: tf.Variable;
  /** instance-norm scale/shift; absent on un-normalized layers */
  s?: tf.Variable;
  o?: tf.Variable;
}

function makeConv(name: string, kh: number, cin: number, cout: number,
                  seed: number, normed = false): ConvParams {
  const fanIn = kh * kh * cin;
  const std = Math.sqrt(2 / fanIn);
  const params: ConvParams = {
    w: tf.variable(tf.randomNormal([kh, kh, cin, cout], 0, std, "float32", seed),
                   true, `${name}_w`),
    b: tf.variable(tf.zeros([cout]), true, `${name}_b`),
  };
  if (normed) {
    params.s = tf.variable(tf.ones([cout]), true, `${name}_s`);
    params.o = tf.variable(tf.zeros([cout]), true, `${name}_o`);
  }
  return params;
}

function applyConv(params: ConvParams, x: tf.Tensor4D, stride: 1 | 2): tf.Tensor4D {
  const op = stride === 1 ? conv1 : conv2;
  let t = tf.add(op(x, params.w), params.b) as tf.Tensor4D;
  if (params.s && params.o) {
    // instance norm over the spatial axes, composed from primitive ops so
    // the WASM backend can differentiate it
    const mean = tf.mean(t, [1, 2], true);
    const centered = tf.sub(t, mean);
    const variance = tf.mean(tf.square(centered), [1, 2], true);
    const normed = tf.div(centered, tf.sqrt(tf.add(variance, 1e-5)));
    t = tf.add(tf.mul(normed, params.s), params.o) as tf.Tensor4D;
  }
  return t;
}

export class Generator {
  layers: Map<string, ConvParams> = new Map();
  private dropoutStep = 0;

  constructor(public cfg: ModelConfig) {
    const c = cfg.baseWidth;
    let seed = cfg.seed * 1000;
    const add = (name: string, kh: number, cin: number, cout: number,
                 normed = true) =>
      this.layers.set(name, makeConv(name, kh, cin, cout, seed++, normed));
    add("e0a", 3, 1, c);
    add("e0b", 3, c, c);
    for (let s = 1; s < 4; s++) {
      add(`e${s}a`, 3, c << (s - 1), c << s);
      add(`e${s}b`, 3, c << s, c << s);
    }
    for (let s = 2; s >= 0; s--) {
      add(`d${s}`, 3, c << (s + 1), c << s);
    }
    add("head", 1, c, 2, false);
  }

  private p(name: string): ConvParams {
    return this.layers.get(name)!;
  }

  forward(x: tf.Tensor4D, training: boolean): tf.Tensor4D {
    const { dropout } = this.cfg;
    return tf.tidy(() => {
      const enc: tf.Tensor4D[] = [];
      let t = x;
      for (let s = 0; s < 4; s++) {
        if (s > 0) t = tf.maxPool(t, 2, 2, "same");
        t = tf.relu(applyConv(this.p(`e${s}a`), t, 1));
        t = tf.relu(applyConv(this.p(`e${s}b`), t, 1));
        enc.push(t);
      }
      for (let s = 2; s >= 0; s--) {
        const [, h, w] = enc[s].shape;
        t = tf.image.resizeBilinear(t, [h, w]);
        t = tf.relu(tf.add(applyConv(this.p(`d${s}`), t, 1), enc[s])) as tf.Tensor4D;
        if (training && dropout > 0) {
          t = tf.dropout(t, dropout, undefined,
                         this.cfg.seed * 7919 + this.dropoutStep++) as tf.Tensor4D;
        }
      }
      return tf.sigmoid(applyConv(this.p("head"), t, 1));
    });
  }

  variables(): tf.Variable[] {
    return [...this.layers.values()].flatMap(
      (p) => p.s && p.o ? [p.w, p.b, p.s, p.o] : [p.w, p.b]);
  }

  dispose(): void {
    this.variables().forEach((v) => v.dispose());
  }
}

export class Discriminator {
  layers: Map<string, ConvParams> = new Map();

  constructor(public cfg: ModelConfig) {
    const c = cfg.baseWidth;
    let seed = cfg.seed * 2000;
    const widths = [3, c, c * 2, c * 4, c * 8];
    for (let s = 0; s < 4; s++) {
      this.layers.set(`s${s}`, makeConv(`disc_s${s}`, 3, widths[s], widths[s + 1],
                                        seed++, s > 0));
    }
    this.layers.set("head", makeConv("disc_head", 1, c * 8, 1, seed++, false));
  }

  /** Probability map over patches, conditioned on the input image. */
  forward(image: tf.Tensor4D, scores: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      let t = tf.concat([image, scores], 3) as tf.Tensor4D;
      for (let s = 0; s < 4; s++) {
        t = tf.leakyRelu(applyConv(this.layers.get(`s${s}`)!, t, 2), 0.2);
      }
      return tf.sigmoid(applyConv(this.layers.get("head")!, t, 1));
    });
  }

  variables(): tf.Variable[] {
    return [...this.layers.values()].flatMap(
      (p) => p.s && p.o ? [p.w, p.b, p.s, p.o] : [p.w, p.b]);
  }

  dispose(): void {
    this.variables().forEach((v) => v.dispose());
  }
}

interface CheckpointPayload {
  config: ModelConfig;
  weights: Record<string, { shape: number[]; data: string }>;
}

function namedVariables(params: ConvParams): Array<[string, tf.Variable]> {
  const out: Array<[string, tf.Variable]> = [["w", params.w], ["b", params.b]];
  if (params.s && params.o) out.push(["s", params.s], ["o", params.o]);
  return out;
}

export async function saveCheckpoint(path: string, gen: Generator): Promise<void> {
  const weights: CheckpointPayload["weights"] = {};
  for (const [name, params] of gen.layers) {
    for (const [suffix, v] of namedVariables(params)) {
      const data = await v.data();
      weights[`${name}.${suffix}`] = {
        shape: v.shape.slice(),
        data: Buffer.from(new Float32Array(data).buffer).toString("base64"),
      };
    }
  }
  fs.writeFileSync(path, JSON.stringify({ config: gen.cfg, weights }));
}

export async function loadCheckpoint(path: string):
    Promise<{ gen: Generator; config: ModelConfig }> {
  const payload = JSON.parse(fs.readFileSync(path, "utf-8")) as CheckpointPayload;
  const gen = new Generator(payload.config);
  for (const [name, params] of gen.layers) {
    for (const [suffix, v] of namedVariables(params)) {
      const stored = payload.weights[`${name}.${suffix}`];
      if (!stored) throw new Error(`checkpoint is missing weights for ${name}.${suffix}`);
      const raw = Buffer.from(stored.data, "base64");
      const values = new Float32Array(raw.buffer, raw.byteOffset,
                                      raw.byteLength / 4);
      v.assign(tf.tensor(values, stored.shape as number[], "float32"));
    }
  }
  return { gen, config: payload.config };
}
