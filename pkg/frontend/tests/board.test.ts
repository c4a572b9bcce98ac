import { describe, expect, it } from 'vitest';

import { automationColor, buildBoard, toCard, topologicalDepths } from '../src/board.js';
import { renderBoard, renderCard } from '../src/render.js';
import type { BlockWire, GraphWire } from '../src/model.js';

function block(kind: string, overrides: Partial<BlockWire> = {}): BlockWire {
  return {
    kind,
    automation: 'Orange',
    state: { phase: 'Pending' },
    ready: false,
    regen_attempts: 0,
    last_job_id: null,
    ...overrides,
  };
}

const POSITIONS_GRAPH: GraphWire = {
  nodes: [
    'HighLevelUnitPurpose',
    'DecisionSupportMatrix',
    'MapMcoo',
    'UnitPositionsTimeBased',
  ],
  edges: [
    ['HighLevelUnitPurpose', 'UnitPositionsTimeBased'],
    ['DecisionSupportMatrix', 'UnitPositionsTimeBased'],
    ['MapMcoo', 'UnitPositionsTimeBased'],
  ],
};

describe('automation coloring', () => {
  it('is a total function of the automation field', () => {
    expect(automationColor('Green')).toBe('green');
    expect(automationColor('Orange')).toBe('orange');
    expect(automationColor('Purple')).toBe('purple');
  });

  it('colors the rendered card', () => {
    const card = toCard(block('Backstory', { automation: 'Purple' }));
    expect(renderCard(card)).toContain('class="card purple"');
  });
});

describe('card view model', () => {
  it('mirrors the API state verbatim', () => {
    const card = toCard(block('X0', { state: { phase: 'AwaitingReview' } }));
    expect(card.phase).toBe('AwaitingReview');
    expect(card.needsReview).toBe(true);
  });

  it('exposes generate only for ready blocks', () => {
    expect(toCard(block('X0')).canGenerate).toBe(false);
    expect(toCard(block('X0', { ready: true })).canGenerate).toBe(true);
  });

  it('withholds generate after three regeneration attempts', () => {
    const exhausted = toCard(block('X0', { ready: true, regen_attempts: 3 }));
    expect(exhausted.canGenerate).toBe(false);
  });

  it('flags stale blocks', () => {
    expect(toCard(block('X0', { state: { phase: 'Stale' } })).stale).toBe(true);
  });
});

describe('board layout', () => {
  it('places unit positions downstream of its three parents', () => {
    const depths = topologicalDepths(POSITIONS_GRAPH);
    expect(depths.get('UnitPositionsTimeBased')).toBe(1);
    expect(depths.get('HighLevelUnitPurpose')).toBe(0);

    const board = buildBoard(POSITIONS_GRAPH.nodes.map((n) => block(n)), POSITIONS_GRAPH);
    expect(board.columns).toHaveLength(2);
    expect(board.columns[1].cards.map((c) => c.kind)).toEqual([
      'UnitPositionsTimeBased',
    ]);
    expect(board.edges).toHaveLength(3);
  });

  it('uses longest-path depth so every edge points rightward', () => {
    const chain: GraphWire = {
      nodes: ['A', 'B', 'C'],
      edges: [
        ['A', 'B'],
        ['B', 'C'],
        ['A', 'C'],
      ],
    };
    const depths = topologicalDepths(chain);
    for (const [from, to] of chain.edges) {
      expect(depths.get(from)!).toBeLessThan(depths.get(to)!);
    }
  });

  it('renders a generate control exactly for ready cards', () => {
    const blocks = [
      block('MapMcoo', { ready: true }),
      block('UnitPositionsTimeBased'),
    ];
    const html = renderBoard(
      buildBoard(blocks, {
        nodes: ['MapMcoo', 'UnitPositionsTimeBased'],
        edges: [['MapMcoo', 'UnitPositionsTimeBased']],
      }),
    );
    expect(html).toContain('data-kind="MapMcoo"');
    expect(html.match(/class="generate"/g)).toHaveLength(1);
  });

  it('parks blocks outside the graph in a trailing column', () => {
    const board = buildBoard(
      [block('A'), block('OpordSection:Extra')],
      { nodes: ['A'], edges: [] },
    );
    const kinds = board.columns.flatMap((c) => c.cards.map((card) => card.kind));
    expect(kinds).toContain('OpordSection:Extra');
  });
});
