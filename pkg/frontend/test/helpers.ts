import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { Manifest } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixturePath(name: string): string {
  return join(here, "fixtures", name);
}

export function loadJson<T>(name: string): T {
  return JSON.parse(readFileSync(fixturePath(name), "utf-8")) as T;
}

export function demoManifest(): Manifest {
  return loadJson<Manifest>("demo_manifest.json");
}

export interface LogStep {
  event: Record<string, unknown>;
  state: Record<string, unknown>;
}

export interface EventLog {
  description: string;
  initial: Record<string, unknown>;
  steps: LogStep[];
}
