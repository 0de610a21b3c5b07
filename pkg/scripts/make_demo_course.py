#!/usr/bin/env python3
"""Regenerate the bundled demo course fixture (fundamental charts lecture).

Writes transcript.srt, frames.lmhc, annotations.json, and demo.conf into
tests/fixtures/demo_course/.  Fully deterministic; rerunning reproduces the
committed bytes.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lecturemap.ingest.frames import Frame, FrameSeries, write_histogram_cache

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "demo_course"

CUES = [
    # segment A: pie charts (0-60 s)
    "Welcome to fundamental charts, a short statistics lecture.",
    "We start with the pie chart, a circle divided into slices.",
    "Each slice of the pie chart shows a percentage of the whole.",
    "Percentages are also called relative frequencies in statistics.",
    "For example, a pie chart of favorite subjects shows forty percent chose math.",
    "The pie chart works best with only a few categories.",
    "Too many slices make the pie chart hard to read.",
    "Relative frequencies in a pie chart always sum to one hundred percent.",
    "Remember that a percentage is a relative frequency times one hundred.",
    "Pie charts give a quick sense of proportions.",
    "Let us compare the pie chart with other displays.",
    "Questions about the pie chart? Keep the percentage idea in mind.",
    # segment B: bar graphs and dot plots (60-120 s)
    "The bar graph displays categories side by side.",
    "Each bar in a bar graph has a height equal to its count.",
    "Unlike the pie chart, the bar graph has a common baseline.",
    "The dot plot is a simpler cousin of the bar graph.",
    "In a dot plot every observation appears as a single dot.",
    "For instance, a dot plot of class sizes stacks dots over each value.",
    "The bar graph and the dot plot both handle categories well.",
    "A bar graph can also show relative frequencies instead of counts.",
    "Choose the bar graph when categories have long labels.",
    "The dot plot shines for small data sets.",
    "Both the bar graph and dot plot avoid the distortion of angles.",
    "Now we are ready for the histogram.",
    # segment C: histograms (120-200 s)
    "The histogram is the main tool for numeric data.",
    "A histogram groups numbers into bins of equal width.",
    "Each block of the histogram stands on its bin interval.",
    "The height of a histogram block shows the percentage in that bin.",
    "So the histogram is built from relative frequencies, like the pie chart.",
    "For example, a histogram of student heights uses bins of five centimeters.",
    "Choosing the bin width changes the look of the histogram.",
    "Narrow bins give a jagged histogram, wide bins hide detail.",
    "The histogram area adds up to one hundred percent.",
    "A histogram block over a wide bin can still be short.",
    "Density scales make histogram blocks comparable across bin widths.",
    "The histogram needs a prerequisite idea, the percentage.",
    "Recall the dot plot; the histogram replaces dots with blocks.",
    "For instance, a histogram of exam scores reveals the distribution shape.",
    "Sketch the histogram of your own data as practice.",
    "That is the histogram, the workhorse of statistics.",
    # segment D: review and quiz (200-240 s)
    "Time for a quiz on charts.",
    "Quiz: which chart suits categorical data best?",
    "Think of the bar graph before you answer.",
    "Quiz: when should you prefer a histogram?",
    "Exercise: draw a pie chart for three percentages.",
    "Review the pie chart, the bar graph, the dot plot, and the histogram.",
    "Each chart tells a different story about data.",
    "That concludes fundamental charts, see you next lecture.",
]

# cue timing: 5 s each, 240 s course; segment C spans 16 cues (120-200 s)
CUE_MS = 5000

SLIDES = [
    # (first frame, last frame exclusive, histogram peak bin, edge base)
    (0, 60, 40, 0.20),
    (60, 120, 90, 0.35),
    (120, 200, 150, 0.50),
    (200, 240, 210, 0.30),
]

def timestamp(ms: int) -> str:
    h, rem = divmod(ms, 3600_000)
    m, rem = divmod(rem, 60_000)
    s, milli = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{milli:03d}"


def write_transcript() -> None:
    blocks = []
    for i, text in enumerate(CUES):
        start, end = i * CUE_MS, (i + 1) * CUE_MS
        blocks.append(f"{i + 1}\n{timestamp(start)} --> {timestamp(end)}\n{text}\n")
    (OUT / "transcript.srt").write_text("\n".join(blocks), encoding="utf-8")


def peaked(bins: int, peak: int, width: int = 3) -> np.ndarray:
    h = np.zeros(bins)
    for offset in range(-width, width + 1):
        idx = min(max(peak + offset, 0), bins - 1)
        h[idx] += width + 1 - abs(offset)
    return h / h.sum()


def write_frames() -> None:
    frames = []
    for first, last, peak, edge_base in SLIDES:
        hist = peaked(256, peak)
        hist.flags.writeable = False
        for i in range(first, last):
            edge = round(edge_base + 0.0002 * (i - first), 6)
            frames.append(Frame(i * 1000, hist, edge, f"slide{peak}"))
    write_histogram_cache(FrameSeries(tuple(frames)), OUT / "frames.lmhc")


def box(t0, t1, x, y, w, h, **kw):
    return {"t_start_ms": t0, "t_end_ms": t1, "bbox": [x, y, w, h], **kw}


def write_annotations() -> None:
    entries = [
        # segment A: heading + body text boxes (hint-less, fallback-classified)
        box(0, 60000, 0.08, 0.06, 0.40, 0.06, text="Pie Charts"),
        box(0, 60000, 0.08, 0.20, 0.45, 0.04,
            text="A pie chart shows percentages of a whole"),
        box(0, 60000, 0.08, 0.245, 0.45, 0.04,
            text="Percentages are relative frequencies"),
        box(0, 60000, 0.08, 0.29, 0.45, 0.04,
            text="Few categories read best"),
        box(5000, 55000, 0.58, 0.22, 0.32, 0.40, kind="Figure"),
        # segment B: heading, body, and a comparison table
        box(60000, 120000, 0.08, 0.06, 0.55, 0.06,
            text="Bar Graphs and Dot Plots"),
        box(60000, 120000, 0.08, 0.20, 0.45, 0.04,
            text="A bar graph compares categories"),
        box(60000, 120000, 0.08, 0.245, 0.45, 0.04,
            text="A dot plot stacks observations"),
        box(65000, 115000, 0.58, 0.22, 0.34, 0.35, kind="Table",
            text="chart comparison"),
        # segment C: heading, body, a formula, handwritten sketch notes
        box(120000, 200000, 0.08, 0.06, 0.40, 0.06, text="Histograms"),
        box(120000, 200000, 0.08, 0.20, 0.46, 0.04,
            text="A histogram groups numbers into bins"),
        box(120000, 200000, 0.08, 0.245, 0.46, 0.04,
            text="Blocks stand on bin intervals"),
        box(125000, 195000, 0.08, 0.40, 0.30, 0.06, text="p = c / n * 100"),
        box(130000, 195000, 0.58, 0.30, 0.34, 0.30, kind="Figure",
            handwritten=True),
        box(150000, 198000, 0.10, 0.55, 0.40, 0.20, text="sketch the blocks",
            handwritten=True),
        # teacher presence throughout
        box(0, 240000, 0.76, 0.66, 0.20, 0.30, teacher_head=True),
    ]
    doc = {"version": 1, "entries": entries}
    (OUT / "annotations.json").write_text(
        json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def write_config() -> None:
    (OUT / "demo.conf").write_text(
        "# demo course build configuration (paths relative to this directory)\n"
        "course_id = fundamental-charts\n"
        "subtitles = transcript.srt\n"
        "frames = frames.lmhc\n"
        "annotations = annotations.json\n"
        "out_dir = build\n"
        "seed = 12345\n",
        encoding="utf-8")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    write_transcript()
    write_frames()
    write_annotations()
    write_config()
    print(f"demo course written to {OUT}")


if __name__ == "__main__":
    main()
