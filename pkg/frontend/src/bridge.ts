/**
 * Process bridge to the native command-line interface.
 *
 * Everything crosses the boundary as JSON text, which round-trips IEEE 754
 * doubles exactly (both sides emit shortest-representation numbers), so
 * 64-bit reals survive end to end.
 */

import { spawnSync } from "node:child_process";

/** Inputs violated a documented precondition (native exit code 1). */
export class ValidationError extends Error {}

/** A solver or enumeration exceeded its resource budget (native exit code 2). */
export class BudgetError extends Error {}

function pythonCommand(): string {
  return process.env.GROUPINFER_PYTHON ?? "python3";
}

export function runCli(args: string[], stdin?: string): string {
  const result = spawnSync(pythonCommand(), ["-m", "groupinfer", ...args], {
    input: stdin,
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (result.error) {
    throw new Error(`failed to launch the native CLI: ${result.error.message}`);
  }
  if (result.status === 0) {
    return result.stdout;
  }
  const message = extractErrorMessage(result.stderr);
  if (result.status === 1) {
    throw new ValidationError(message);
  }
  throw new BudgetError(message);
}

function extractErrorMessage(stderr: string): string {
  const lines = stderr.trim().split("\n");
  for (const line of lines) {
    if (line.startsWith("error: ")) {
      return line.slice("error: ".length);
    }
  }
  return lines[lines.length - 1] ?? "native command failed";
}
