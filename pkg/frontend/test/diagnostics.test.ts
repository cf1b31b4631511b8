import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { dotToSvg, extractCurves, extractRankingScores, parseDot } from "../src/diagnostics.js";
import { renderCurves } from "../src/render.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8"));
}

describe("metrics extraction", () => {
  const metrics = fixture("metrics.json") as { evaluation: unknown };

  it("yields one point per threshold (nine in total)", () => {
    const curves = extractCurves(metrics.evaluation);
    expect(curves).toHaveLength(9);
    expect(curves.map((p) => p.threshold)).toEqual([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
    for (const point of curves) {
      expect(point.accuracy).toBeGreaterThanOrEqual(0);
      expect(point.accuracy).toBeLessThanOrEqual(1);
    }
    const html = renderCurves(curves);
    expect((html.match(/<tr><td>/g) ?? []).length).toBe(9);
  });

  it("yields ranking score rows with the headline k present", () => {
    const scores = extractRankingScores(metrics.evaluation);
    expect(scores.length).toBeGreaterThanOrEqual(5);
    expect(scores.map((s) => s.k)).toContain(5);
  });
});

describe("DOT parsing and client-side rendering", () => {
  const dot = readFileSync(join(FIXTURES, "graph.dot"), "utf-8");

  it("parses the service's DOT export", () => {
    const graph = parseDot(dot);
    expect(graph.nodes.length).toBeGreaterThan(0);
    expect(graph.edges.length).toBeGreaterThan(0);
    for (const edge of graph.edges) {
      expect(graph.nodes).toContain(edge.from);
      expect(graph.nodes).toContain(edge.to);
      expect(edge.penwidth).toBeGreaterThan(0);
    }
  });

  it("renders an SVG with one circle per node and one line per edge", () => {
    const graph = parseDot(dot);
    const svg = dotToSvg(graph);
    expect(svg.startsWith("<svg")).toBe(true);
    expect((svg.match(/<circle /g) ?? []).length).toBe(graph.nodes.length);
    expect((svg.match(/<line /g) ?? []).length).toBe(graph.edges.length);
  });

  it("rejects text that is not a digraph", () => {
    expect(() => parseDot("graph { }")).toThrow(/digraph/);
  });
});
