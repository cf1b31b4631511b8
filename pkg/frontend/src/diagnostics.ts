/** Model diagnostics: metric curves from the stored evaluation and a
 * client-side rendering of the fitted graph from its DOT text.
 */

export interface CurvePoint {
  threshold: number;
  accuracy: number;
  precision: number | null;
  recall: number | null;
}

export interface RankingScore {
  k: number;
  precision: number;
  recall: number | null;
}

interface EvaluationJson {
  thresholds: {
    thresholds: number[];
    accuracy: Record<string, number>;
    precision: Record<string, number | null>;
    recall: Record<string, number | null>;
  };
  ranking: {
    ranking_precision: Record<string, number>;
    ranking_recall: Record<string, number | null>;
    headline_k: number;
  };
}

export function extractCurves(evaluation: unknown): CurvePoint[] {
  const ev = evaluation as EvaluationJson;
  return ev.thresholds.thresholds.map((t) => {
    const key = String(t);
    return {
      threshold: t,
      accuracy: ev.thresholds.accuracy[key] ?? NaN,
      precision: ev.thresholds.precision[key] ?? null,
      recall: ev.thresholds.recall[key] ?? null,
    };
  });
}

export function extractRankingScores(evaluation: unknown): RankingScore[] {
  const ev = evaluation as EvaluationJson;
  return Object.keys(ev.ranking.ranking_precision)
    .map((key) => Number(key))
    .sort((a, b) => a - b)
    .map((k) => ({
      k,
      precision: ev.ranking.ranking_precision[String(k)] ?? NaN,
      recall: ev.ranking.ranking_recall[String(k)] ?? null,
    }));
}

// ---------------------------------------------------------------------------
// DOT subset parsing and a small layered SVG layout

export interface DotGraph {
  name: string;
  nodes: string[];
  edges: { from: string; to: string; penwidth: number }[];
}

const ID = String.raw`"((?:[^"\\]|\\.)*)"`;
const NODE_RE = new RegExp(`^${ID}\\s*\\[[^\\]]*\\];?$`);
const EDGE_RE = new RegExp(`^${ID}\\s*->\\s*${ID}\\s*(?:\\[([^\\]]*)\\])?;?$`);

function unescapeId(raw: string): string {
  return raw.replace(/\\(.)/g, "$1");
}

/** Parses the service's DOT exports (quoted ids, node and edge statements). */
export function parseDot(text: string): DotGraph {
  const header = text.match(/^digraph\s+(?:"((?:[^"\\]|\\.)*)"\s*)?\{/);
  if (!header) {
    throw new Error("not a digraph");
  }
  const graph: DotGraph = { name: header[1] ? unescapeId(header[1]) : "", nodes: [], edges: [] };
  const body = text.slice(header[0].length, text.lastIndexOf("}"));
  for (const line of body.split("\n")) {
    const stmt = line.trim();
    if (!stmt) continue;
    const edge = stmt.match(EDGE_RE);
    if (edge) {
      const attrs = edge[3] ?? "";
      const pen = attrs.match(/penwidth=([0-9.]+)/);
      graph.edges.push({
        from: unescapeId(edge[1] ?? ""),
        to: unescapeId(edge[2] ?? ""),
        penwidth: pen ? Number(pen[1]) : 1,
      });
      continue;
    }
    const node = stmt.match(NODE_RE);
    if (node) {
      graph.nodes.push(unescapeId(node[1] ?? ""));
      continue;
    }
    throw new Error(`unparseable DOT statement: ${stmt}`);
  }
  return graph;
}

function tagOf(name: string): string {
  const colon = name.indexOf(":");
  return colon >= 0 ? name.slice(0, colon) : "";
}

/** Layered layout: one column per variable-type tag, edges as weighted lines. */
export function dotToSvg(graph: DotGraph, width = 960, rowHeight = 22): string {
  const columns: string[] = [];
  for (const node of graph.nodes) {
    const tag = tagOf(node);
    if (!columns.includes(tag)) {
      columns.push(tag);
    }
  }
  const perColumn = new Map<string, string[]>();
  for (const node of graph.nodes) {
    const list = perColumn.get(tagOf(node)) ?? [];
    list.push(node);
    perColumn.set(tagOf(node), list);
  }
  const colWidth = width / Math.max(columns.length, 1);
  const pos = new Map<string, { x: number; y: number }>();
  let maxRows = 1;
  columns.forEach((tag, ci) => {
    const nodes = perColumn.get(tag) ?? [];
    maxRows = Math.max(maxRows, nodes.length);
    nodes.forEach((node, ri) => {
      pos.set(node, { x: colWidth * ci + colWidth / 2, y: 30 + ri * rowHeight });
    });
  });
  const height = 40 + maxRows * rowHeight;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" role="img">`,
  ];
  for (const edge of graph.edges) {
    const a = pos.get(edge.from);
    const b = pos.get(edge.to);
    if (!a || !b) continue;
    parts.push(
      `<line x1="${a.x.toFixed(1)}" y1="${a.y}" x2="${b.x.toFixed(1)}" y2="${b.y}" ` +
        `stroke="#5b7db1" stroke-opacity="0.55" stroke-width="${edge.penwidth.toFixed(2)}"/>`,
    );
  }
  for (const [node, { x, y }] of pos) {
    parts.push(
      `<circle cx="${x.toFixed(1)}" cy="${y}" r="3.5" fill="#1f3a5f"/>` +
        `<text x="${(x + 6).toFixed(1)}" y="${y + 4}" font-size="10">${escapeXml(node)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
