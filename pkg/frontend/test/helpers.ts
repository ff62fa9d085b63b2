import { execFileSync } from "child_process";
import { existsSync, mkdirSync, writeFileSync } from "fs";
import path from "path";
import { fileURLToPath } from "url";

const HERE = path.dirname(fileURLToPath(import.meta.url));
export const REPO_ROOT = path.resolve(HERE, "..", "..");
const FIXTURES = path.join(HERE, "fixtures");

function runPrimaryCli(args: string[]): void {
  execFileSync("python3", ["-m", "mommd", ...args], {
    cwd: REPO_ROOT,
    env: { ...process.env, PYTHONPATH: path.join(REPO_ROOT, "src") },
    stdio: ["ignore", "pipe", "pipe"],
  });
}

function runPython(code: string): void {
  execFileSync("python3", ["-c", code], {
    cwd: REPO_ROOT,
    env: { ...process.env, PYTHONPATH: path.join(REPO_ROOT, "src") },
    stdio: ["ignore", "pipe", "pipe"],
  });
}

/** Error-sweep CSV: the acceptance run's output when present, else a small one. */
export function ensureExp1Csv(): string {
  const fromAcceptance = path.join(REPO_ROOT, "artifacts", "exp1_rate.csv");
  if (existsSync(fromAcceptance)) return fromAcceptance;
  mkdirSync(FIXTURES, { recursive: true });
  const out = path.join(FIXTURES, "exp1_small.csv");
  if (existsSync(out)) return out;
  const config = path.join(FIXTURES, "exp1_small.json");
  writeFileSync(
    config,
    JSON.stringify({
      experiment: "gauss_clean",
      kernel: "poly:degree=2,c=1",
      estimators: ["vstat", "monk_bcd_fast"],
      n_list: [30, 60, 90],
      q_list: [3],
      reps: 8,
      iterations: 10,
      seed: 11,
    }),
  );
  runPrimaryCli(["exp1", "--config", config, "--out", out]);
  return out;
}

/** Two-sample-test CSV: the acceptance surrogate when present, else a small run
 * on generated splice-format data. */
export function ensureDnaCsv(): string {
  const fromAcceptance = path.join(REPO_ROOT, "artifacts", "dna_surrogate.csv");
  if (existsSync(fromAcceptance)) return fromAcceptance;
  mkdirSync(FIXTURES, { recursive: true });
  const out = path.join(FIXTURES, "dna_small.csv");
  if (existsSync(out)) return out;
  const data = path.join(FIXTURES, "synthetic_splice.data");
  runPython(
    `from mommd.datagen import write_synthetic_splice; write_synthetic_splice(${JSON.stringify(data)}, n_per_class=80, seed=1)`,
  );
  const config = path.join(FIXTURES, "dna_small.json");
  writeFileSync(
    config,
    JSON.stringify({
      experiment: "dna",
      kernel: "ssk:p=2,lambda=0.8,norm=1",
      estimators: ["vstat", "monk_bcd_fast"],
      n_list: [60],
      q_list: [5],
      reps: 5,
      bootstrap: 25,
      alpha: 0.05,
      seed: 3,
      drop_remainder: true,
    }),
  );
  runPrimaryCli(["dna", "--data", data, "--config", config, "--out", out]);
  return out;
}
