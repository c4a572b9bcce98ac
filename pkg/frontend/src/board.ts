/**
 * Dependency-graph board view model.
 *
 * Pure functions from API payloads to renderable structures: cards colored
 * by automation level, laid out left-to-right in topological columns, with
 * a Generate control wherever the server reports readiness.
 */

import type { Automation, BlockWire, GraphWire, PhaseName } from './model.js';

export type CardColor = 'green' | 'orange' | 'purple';

export interface BlockCard {
  kind: string;
  color: CardColor;
  phase: PhaseName;
  ready: boolean;
  canGenerate: boolean;
  needsReview: boolean;
  stale: boolean;
  lastJobId: string | null;
  options: string[];
}

export interface BoardColumn {
  depth: number;
  cards: BlockCard[];
}

export interface BoardEdge {
  from: string;
  to: string;
}

export interface Board {
  columns: BoardColumn[];
  edges: BoardEdge[];
}

export function automationColor(automation: Automation): CardColor {
  return automation.toLowerCase() as CardColor;
}

export function toCard(block: BlockWire): BlockCard {
  const phase = block.state.phase;
  return {
    kind: block.kind,
    color: automationColor(block.automation),
    phase,
    ready: block.ready,
    canGenerate: block.ready && block.regen_attempts < 3,
    needsReview: phase === 'AwaitingReview' || phase === 'AwaitingSelection',
    stale: phase === 'Stale',
    lastJobId: block.last_job_id,
    options: block.state.options ?? [],
  };
}

/** Longest-path depth per node: every edge points to a deeper column. */
export function topologicalDepths(graph: GraphWire): Map<string, number> {
  const incoming = new Map<string, string[]>();
  for (const node of graph.nodes) incoming.set(node, []);
  for (const [from, to] of graph.edges) incoming.get(to)?.push(from);

  const depths = new Map<string, number>();
  const visiting = new Set<string>();
  const depthOf = (node: string): number => {
    const known = depths.get(node);
    if (known !== undefined) return known;
    if (visiting.has(node)) throw new Error(`cycle at ${node}`);
    visiting.add(node);
    const parents = incoming.get(node) ?? [];
    const depth = parents.length === 0 ? 0 : 1 + Math.max(...parents.map(depthOf));
    visiting.delete(node);
    depths.set(node, depth);
    return depth;
  };
  for (const node of graph.nodes) depthOf(node);
  return depths;
}

export function buildBoard(blocks: BlockWire[], graph: GraphWire): Board {
  const depths = topologicalDepths(graph);
  const byKind = new Map(blocks.map((b) => [b.kind, b]));
  const columns = new Map<number, BlockCard[]>();
  for (const node of graph.nodes) {
    const block = byKind.get(node);
    if (!block) continue;
    const depth = depths.get(node) ?? 0;
    const column = columns.get(depth) ?? [];
    column.push(toCard(block));
    columns.set(depth, column);
  }
  // blocks outside the graph (extra OPORD sections) go in a trailing column
  const maxDepth = Math.max(0, ...columns.keys());
  for (const block of blocks) {
    if (!depths.has(block.kind)) {
      const column = columns.get(maxDepth + 1) ?? [];
      column.push(toCard(block));
      columns.set(maxDepth + 1, column);
    }
  }
  const ordered = [...columns.entries()]
    .sort(([a], [b]) => a - b)
    .map(([depth, cards]) => ({
      depth,
      cards: cards.sort((a, b) => a.kind.localeCompare(b.kind)),
    }));
  return {
    columns: ordered,
    edges: graph.edges.map(([from, to]) => ({ from, to })),
  };
}
