/** tfjs backend bootstrap: prefer WASM, fall back to the plain JS kernels. */

import * as path from "node:path";
import { createRequire } from "node:module";

import * as tf from "@tensorflow/tfjs";
import { setWasmPaths } from "@tensorflow/tfjs-backend-wasm";

const require = createRequire(import.meta.url);

let ready: Promise<string> | null = null;

export function initBackend(): Promise<string> {
  if (!ready) {
    ready = (async () => {
      try {
        const wasmDir = path.dirname(
          require.resolve("@tensorflow/tfjs-backend-wasm/dist/tf-backend-wasm.js"));
        setWasmPaths(wasmDir + path.sep);
        if (await tf.setBackend("wasm")) {
          await tf.ready();
          return tf.getBackend();
        }
      } catch {
        // fall through to the cpu backend
      }
      await tf.setBackend("cpu");
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return ready;
}
