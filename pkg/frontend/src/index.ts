/**
 * Bindings for the groupinfer selection machinery.
 *
 * Exposes exactly four things: the subset solver, the pruning-schedule
 * calculator, a callback-driven group-inference loop, and version
 * metadata. Generation and scoring stay on the caller's side of the
 * boundary as callbacks over flat Float64 buffers; all selection decisions
 * are made by the native solver.
 */

import { BudgetError, ValidationError, runCli } from "./bridge.js";

export { BudgetError, ValidationError };

export const VERSION = "0.1.0";

export type Strategy = "auto" | "exact" | "greedy";

export interface Selection {
  indices: number[];
  objective: number;
  strategy: "exact" | "greedy";
}

export interface Schedule {
  m: number;
  k: number;
  rho: number;
  steps: number;
  sizes: number[];
  tStar: number | null;
  nfe: number;
  naive: number;
  savings: number;
}

/**
 * Supplies candidate previews and scores to the engine.
 *
 * `step` advances the listed live candidates once and returns their
 * previews as one flat row-major buffer of liveIds.length * dimension
 * doubles; pruned candidates are never passed again. `unary` and `binary`
 * score a preview buffer of `count` rows; `binary` returns a flat
 * row-major symmetric count * count matrix with a zero diagonal.
 * Callbacks are invoked serially and must be deterministic for the run's
 * report to be reproducible.
 */
export interface CallbackGenerator {
  readonly dimension: number;
  step(stepIndex: number, liveIds: number[]): Float64Array;
  unary(previews: Float64Array, count: number): Float64Array;
  binary(previews: Float64Array, count: number): Float64Array;
}

export interface GroupInferenceOptions {
  m: number;
  k: number;
  rho: number;
  tTotal: number;
  lambda: number;
  strategy?: Strategy;
}

export interface StepRecord {
  step: number;
  poolSize: number;
  selected: number[];
  strategy: string | null;
}

export interface GroupInferenceReport {
  finalIndices: number[];
  steps: StepRecord[];
  finalSolveStrategy: string | null;
  nfeCounted: number;
  nfePredicted: number;
}

function toNested(binary: Float64Array | number[], n: number): number[][] {
  const flat = Array.from(binary);
  if (flat.length !== n * n) {
    throw new ValidationError(
      `binary buffer has ${flat.length} entries, expected ${n} * ${n}`,
    );
  }
  const rows: number[][] = [];
  for (let i = 0; i < n; i++) {
    rows.push(flat.slice(i * n, (i + 1) * n));
  }
  return rows;
}

/** Pick exactly k indices maximizing unary sum + lambda * pairwise sum. */
export function solve(
  unary: Float64Array | number[],
  binary: Float64Array | number[],
  k: number,
  lambda = 1.0,
  strategy: Strategy = "auto",
): Selection {
  const u = Array.from(unary);
  const payload = JSON.stringify({ unary: u, binary: toNested(binary, u.length) });
  const out = runCli(
    ["solve", "--scores", "-", "--k", String(k), "--lambda", String(lambda),
     "--strategy", strategy],
    payload,
  );
  return JSON.parse(out) as Selection;
}

/** Per-step pool sizes and evaluation totals for progressive pruning. */
export function buildSchedule(m: number, k: number, rho: number, steps: number): Schedule {
  const out = runCli([
    "nfe", "--json", "--m", String(m), "--k", String(k),
    "--rho", String(rho), "--steps", String(steps),
  ]);
  const doc = JSON.parse(out);
  return {
    m: doc.m, k: doc.k, rho: doc.rho, steps: doc.steps,
    sizes: doc.sizes, tStar: doc.t_star, nfe: doc.nfe,
    naive: doc.naive, savings: doc.savings,
  };
}

/**
 * Run progressive pruning over a callback generator.
 *
 * Follows the native engine's loop exactly: every live candidate advances
 * once per step; whenever the schedule shrinks the pool, previews are
 * scored and the native solver picks the survivors; once the pool is down
 * to k no further scoring happens; a pool still above k after the last
 * step is cut by one final selection over the finished previews.
 */
export function groupInference(
  gen: CallbackGenerator,
  opts: GroupInferenceOptions,
): GroupInferenceReport {
  const { m, k, rho, tTotal, lambda } = opts;
  const strategy = opts.strategy ?? "auto";
  // One extra step so the target size after the last step is available.
  const extended = buildSchedule(m, k, rho, tTotal + 1);
  const sizes = extended.sizes.slice(0, tTotal);
  const nfePredicted = sizes.reduce((a, b) => a + b, 0);

  let live = Array.from({ length: m }, (_, i) => i);
  let previews: Float64Array = new Float64Array(0);
  let nfeCounted = 0;
  const steps: StepRecord[] = [];

  for (let j = 0; j < tTotal; j++) {
    const poolSize = live.length;
    previews = gen.step(j + 1, live);
    if (previews.length !== poolSize * gen.dimension) {
      throw new ValidationError(
        `step callback returned ${previews.length} values, expected ` +
        `${poolSize} * ${gen.dimension}`,
      );
    }
    nfeCounted += poolSize;
    const target = extended.sizes[j + 1];
    let strategyUsed: string | null = null;
    if (poolSize > k && target < poolSize) {
      const selection = solveOnPreviews(gen, previews, poolSize, target, lambda, strategy, `step ${j + 1}`);
      live = selection.indices.map((i) => live[i]);
      previews = subsetRows(previews, selection.indices, gen.dimension);
      strategyUsed = selection.strategy;
    }
    steps.push({ step: j + 1, poolSize, selected: [...live], strategy: strategyUsed });
  }

  let finalSolveStrategy: string | null = null;
  if (live.length > k) {
    const selection = solveOnPreviews(gen, previews, live.length, k, lambda, strategy, "final selection");
    live = selection.indices.map((i) => live[i]);
    finalSolveStrategy = selection.strategy;
  }

  return { finalIndices: live, steps, finalSolveStrategy, nfeCounted, nfePredicted };
}

function solveOnPreviews(
  gen: CallbackGenerator,
  previews: Float64Array,
  count: number,
  k: number,
  lambda: number,
  strategy: Strategy,
  where: string,
): Selection {
  const unary = gen.unary(previews, count);
  const binary = gen.binary(previews, count);
  try {
    return solve(unary, binary, k, lambda, strategy);
  } catch (err) {
    if (err instanceof Error) {
      err.message = `${where}: ${err.message}`;
    }
    throw err;
  }
}

function subsetRows(buffer: Float64Array, rows: number[], dim: number): Float64Array {
  const out = new Float64Array(rows.length * dim);
  rows.forEach((row, at) => {
    out.set(buffer.subarray(row * dim, (row + 1) * dim), at * dim);
  });
  return out;
}

/** Version string of the native package backing these bindings. */
export function nativeVersion(): string {
  return runCli(["--version"]).trim();
}
