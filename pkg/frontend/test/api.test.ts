import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { CourseApi, parseCues } from "../src/api.js";
import type { FetchLike } from "../src/api.js";
import { fixturePath } from "./helpers.js";

function fakeFetch(routes: Record<string, string | object>): FetchLike {
  return async (url: string) => {
    const path = new URL(url).pathname;
    const hit = routes[path];
    return {
      ok: hit !== undefined,
      status: hit !== undefined ? 200 : 404,
      text: async () =>
        typeof hit === "string" ? hit : JSON.stringify(hit ?? ""),
      json: async () => (typeof hit === "string" ? JSON.parse(hit) : hit),
    };
  };
}

describe("course api", () => {
  const manifestText = readFileSync(fixturePath("demo_manifest.json"), "utf-8");

  it("fetches and checks the manifest", async () => {
    const api = new CourseApi(
      "http://test.local",
      fakeFetch({
        "/courses/demo/manifest": JSON.parse(manifestText) as object,
      }),
    );
    const manifest = await api.manifest("demo");
    expect(manifest.course_id).toBe("fundamental-charts");
  });

  it("rejects unknown schema versions", async () => {
    const doc = JSON.parse(manifestText) as { schema_version: string };
    doc.schema_version = "99";
    const api = new CourseApi(
      "http://test.local",
      fakeFetch({ "/courses/demo/manifest": doc }),
    );
    await expect(api.manifest("demo")).rejects.toThrow(/schema/);
  });

  it("propagates 404s", async () => {
    const api = new CourseApi("http://test.local", fakeFetch({}));
    await expect(api.manifest("demo")).rejects.toThrow(/404/);
  });

  it("lists courses and builds asset urls", async () => {
    const api = new CourseApi(
      "http://test.local",
      fakeFetch({ "/courses": ["a", "b"] }),
    );
    expect(await api.listCourses()).toEqual(["a", "b"]);
    expect(api.assetUrl("a", "key0.png")).toBe(
      "http://test.local/courses/a/assets/key0.png",
    );
  });
});

describe("subtitle parsing", () => {
  it("parses srt cues with millisecond precision", () => {
    const cues = parseCues(
      "1\n00:00:01,000 --> 00:00:02,500\nhello\nthere\n\n" +
        "2\n00:00:03,000 --> 00:00:04,000\nnext\n",
    );
    expect(cues).toEqual([
      { startMs: 1000, endMs: 2500, text: "hello\nthere" },
      { startMs: 3000, endMs: 4000, text: "next" },
    ]);
  });

  it("parses webvtt including short timestamps and settings", () => {
    const cues = parseCues(
      "WEBVTT\n\n00:05.250 --> 00:07.000 align:start\nshort form\n\n" +
        "00:00:08.000 --> 00:00:09.000\nlong form\n",
    );
    expect(cues).toEqual([
      { startMs: 5250, endMs: 7000, text: "short form" },
      { startMs: 8000, endMs: 9000, text: "long form" },
    ]);
  });

  it("skips malformed cues", () => {
    const cues = parseCues("1\n00:00:xx,000 --> 00:00:02,000\nbroken\n");
    expect(cues).toEqual([]);
  });
});
