/** HTTP client for the course service plus a small subtitle parser. */

import type { Cue, Manifest } from "./types.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  text(): Promise<string>;
  json(): Promise<unknown>;
}>;

export class CourseApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  async listCourses(): Promise<string[]> {
    const response = await this.fetchFn(this.url("/courses"));
    if (!response.ok) throw new Error(`courses: HTTP ${response.status}`);
    return (await response.json()) as string[];
  }

  async manifest(courseId: string): Promise<Manifest> {
    const response = await this.fetchFn(
      this.url(`/courses/${courseId}/manifest`),
    );
    if (!response.ok) throw new Error(`manifest: HTTP ${response.status}`);
    const doc = (await response.json()) as Manifest;
    if (doc.schema_version !== "1") {
      throw new Error(`unsupported manifest schema ${doc.schema_version}`);
    }
    return doc;
  }

  async transcript(courseId: string): Promise<Cue[]> {
    const response = await this.fetchFn(
      this.url(`/courses/${courseId}/transcript`),
    );
    if (!response.ok) throw new Error(`transcript: HTTP ${response.status}`);
    return parseCues(await response.text());
  }

  assetUrl(courseId: string, assetPath: string): string {
    return this.url(`/courses/${courseId}/assets/${assetPath}`);
  }
}

function parseTimestamp(token: string): number | null {
  const long = token.match(/^(\d{2,}):([0-5]\d):([0-5]\d)[.,](\d{3})$/);
  if (long !== null) {
    return (
      ((Number(long[1]) * 60 + Number(long[2])) * 60 + Number(long[3])) * 1000 +
      Number(long[4])
    );
  }
  const short = token.match(/^([0-5]\d):([0-5]\d)\.(\d{3})$/);
  if (short !== null) {
    return (Number(short[1]) * 60 + Number(short[2])) * 1000 + Number(short[3]);
  }
  return null;
}

/** Parse SRT or WebVTT text into cues (timing and text only). */
export function parseCues(text: string): Cue[] {
  const lines = text.split(/\r?\n/);
  const cues: Cue[] = [];
  let i = 0;
  while (i < lines.length) {
    const line = lines[i]!;
    if (!line.includes("-->")) {
      i += 1;
      continue;
    }
    const [left, right] = line.split("-->");
    const start = parseTimestamp((left ?? "").trim());
    const end = parseTimestamp((right ?? "").trim().split(/[ \t]/)[0]!);
    i += 1;
    const body: string[] = [];
    while (i < lines.length && lines[i]!.trim() !== "") {
      body.push(lines[i]!);
      i += 1;
    }
    if (start !== null && end !== null && start < end && body.length > 0) {
      cues.push({ startMs: start, endMs: end, text: body.join("\n") });
    }
  }
  return cues;
}
