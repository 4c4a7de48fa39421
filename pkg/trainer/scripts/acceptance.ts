/**
 * Acceptance run: train on the standard 200-image 128x128 toy corpus for 50
 * epochs, require the combined objective (lambda = 100) to drop by at least
 * half from epoch 1 to epoch 50, push inferred maps through the primary
 * extractor, and require corpus F >= 0.7 at IoU 0.5 inside a 30-minute
 * budget. Results land in acceptance_result.txt.
 */

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { initBackend } from "../src/backend.js";
import { loadCorpus } from "../src/corpus.js";
import { infer } from "../src/infer.js";
import { DEFAULT_CONFIG, ModelConfig } from "../src/model.js";
import { train } from "../src/train.js";

const CORPUS_SEED = 424242;

// narrow generator so the 50-epoch budget fits a single CPU core; topology
// and objective are unchanged from the defaults
const CONFIG: ModelConfig = {
  ...DEFAULT_CONFIG,
  baseWidth: 4,
  batchSize: 8,
  learningRate: 5e-3,
  dEvery: 2,
  epochs: 50,
  seed: 7,
};

function run(cmd: string, args: string[]): string {
  return execFileSync(cmd, args, { encoding: "utf-8" });
}

async function main(): Promise<number> {
  const t0 = Date.now();
  const work = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-acceptance-"));
  const corpusDir = path.join(work, "corpus");
  const lines: string[] = [];
  const report = (name: string, ok: boolean, detail: string) => {
    const line = `${ok ? "PASS" : "FAIL"}: ${name} (${detail})`;
    console.log(line);
    lines.push(line);
    return ok;
  };

  console.log(`workdir: ${work}`);
  run("softtext", ["synth", corpusDir, "--images", "200",
                   "--width", "128", "--height", "128", "--boxes", "1:3",
                   "--box-w", "48:100", "--box-h", "16:30", "--gap", "4",
                   "--seed", String(CORPUS_SEED)]);

  const backend = await initBackend();
  console.log(`backend: ${backend}`);
  const corpus = loadCorpus(corpusDir);
  const runDir = path.join(work, "run");
  const logs = await train(corpus, CONFIG, runDir, (log) => {
    if (log.epoch % 5 === 0 || log.epoch === 1) {
      console.log(`epoch ${log.epoch}: l2=${log.l2.toFixed(4)} ` +
                  `combined=${log.combined.toFixed(4)}`);
    }
  });

  const first = logs[0].combined;
  const last = logs[logs.length - 1].combined;
  const dropOk = report(
    "combined objective halves from epoch 1 to epoch 50",
    last <= 0.5 * first,
    `epoch1=${first.toFixed(3)} epoch50=${last.toFixed(3)} ` +
    `drop=${(100 * (1 - last / first)).toFixed(1)}%`);

  const predDir = path.join(work, "pred");
  await infer(path.join(runDir, "checkpoint.json"), corpus, predDir);
  const detsDir = path.join(work, "dets");
  run("softtext", ["extract", predDir, detsDir]);
  const reportPath = path.join(work, "report.json");
  const summary = run("softtext", ["evaluate", detsDir,
                                   path.join(corpusDir, "images"),
                                   "--report", reportPath]).trim();
  console.log(summary);
  const f = JSON.parse(fs.readFileSync(reportPath, "utf-8")).f_measure as number;
  const fOk = report("extractor reaches corpus F >= 0.7 on inferred maps",
                     f >= 0.7, `F=${f.toFixed(4)}`);

  const minutes = (Date.now() - t0) / 60000;
  const timeOk = report("run fits the 30-minute budget",
                        minutes < 30, `${minutes.toFixed(1)} min`);

  fs.writeFileSync(path.join(process.cwd(), "acceptance_result.txt"),
                   lines.join("\n") + `\n(${new Date().toISOString()}, ` +
                   `backend ${backend}, workdir ${work})\n`);
  return dropOk && fOk && timeOk ? 0 : 1;
}

main().then((code) => process.exit(code));
