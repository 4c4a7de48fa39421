/**
 * Trainer CLI: `train CORPUS OUT_DIR [flags]` and
 * `infer CHECKPOINT CORPUS OUT_DIR`. Flags may come from a --config file of
 * flat `key = value` lines; explicit flags win.
 */

import * as fs from "node:fs";
import { parseArgs } from "node:util";

import { initBackend } from "./backend.js";
import { loadCorpus } from "./corpus.js";
import { infer } from "./infer.js";
import { DEFAULT_CONFIG, ModelConfig } from "./model.js";
import { train } from "./train.js";

const FLAGS = {
  config: { type: "string" },
  "base-width": { type: "string" },
  dropout: { type: "string" },
  lambda: { type: "string" },
  lr: { type: "string" },
  beta1: { type: "string" },
  batch: { type: "string" },
  epochs: { type: "string" },
  "d-every": { type: "string" },
  "input-noise": { type: "string" },
  seed: { type: "string" },
} as const;

function loadConfigFile(path: string): Record<string, string> {
  const values: Record<string, string> = {};
  for (const raw of fs.readFileSync(path, "utf-8").split("\n")) {
    const line = raw.split("#", 1)[0].trim();
    if (!line) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new Error(`${path}: expected key = value, got ${raw}`);
    values[line.slice(0, eq).trim()] = line.slice(eq + 1).trim();
  }
  return values;
}

function numeric(flags: Record<string, string | undefined>,
                 file: Record<string, string>, key: string,
                 fallback: number): number {
  const raw = flags[key] ?? file[key];
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value)) throw new Error(`bad numeric value for ${key}: ${raw}`);
  return value;
}

function buildConfig(flags: Record<string, string | undefined>,
                     width: number, height: number): ModelConfig {
  const file = flags.config ? loadConfigFile(flags.config) : {};
  const d = DEFAULT_CONFIG;
  return {
    inputWidth: width,
    inputHeight: height,
    baseWidth: numeric(flags, file, "base-width", d.baseWidth),
    dropout: numeric(flags, file, "dropout", d.dropout),
    l2Weight: numeric(flags, file, "lambda", d.l2Weight),
    learningRate: numeric(flags, file, "lr", d.learningRate),
    adamBeta1: numeric(flags, file, "beta1", d.adamBeta1),
    batchSize: numeric(flags, file, "batch", d.batchSize),
    epochs: numeric(flags, file, "epochs", d.epochs),
    dEvery: numeric(flags, file, "d-every", d.dEvery),
    inputNoiseSigma: numeric(flags, file, "input-noise", d.inputNoiseSigma),
    seed: numeric(flags, file, "seed", d.seed),
  };
}

export async function main(argv: string[]): Promise<number> {
  const { values, positionals } = parseArgs({
    args: argv, options: FLAGS, allowPositionals: true,
  });
  const command = positionals[0];
  try {
    if (command === "train") {
      const [, corpusDir, outDir] = positionals;
      if (!corpusDir || !outDir) throw new Error("usage: train CORPUS OUT_DIR");
      const backend = await initBackend();
      const corpus = loadCorpus(corpusDir);
      const cfg = buildConfig(values, corpus.width, corpus.height);
      console.log(`backend=${backend} images=${corpus.images.length} ` +
                  `size=${corpus.width}x${corpus.height} width=${cfg.baseWidth} ` +
                  `epochs=${cfg.epochs}`);
      const t0 = Date.now();
      await train(corpus, cfg, outDir, (log) => {
        console.log(`epoch ${log.epoch}: g_adv=${log.gAdv.toFixed(4)} ` +
                    `d=${log.dLoss.toFixed(4)} l2=${log.l2.toFixed(4)} ` +
                    `combined=${log.combined.toFixed(4)}`);
      });
      console.log(`trained in ${((Date.now() - t0) / 1000).toFixed(0)}s; ` +
                  `checkpoint + losses.csv in ${outDir}`);
      return 0;
    }
    if (command === "infer") {
      const [, checkpoint, corpusDir, outDir] = positionals;
      if (!checkpoint || !corpusDir || !outDir) {
        throw new Error("usage: infer CHECKPOINT CORPUS OUT_DIR");
      }
      await initBackend();
      const corpus = loadCorpus(corpusDir);
      const written = await infer(checkpoint, corpus, outDir);
      console.log(`wrote ${written.length} maps under ${outDir}`);
      return 0;
    }
    throw new Error(`unknown command ${command ?? "(none)"}; use train or infer`);
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!)) {
  main(process.argv.slice(2)).then((code) => process.exit(code));
}
