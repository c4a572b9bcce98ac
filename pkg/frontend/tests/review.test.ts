import { describe, expect, it } from 'vitest';

import { toCard } from '../src/board.js';
import { submitAction, validateAction } from '../src/review.js';
import type { ApiClient } from '../src/api.js';
import type { BlockWire } from '../src/model.js';

function reviewCard(overrides: Partial<BlockWire> = {}) {
  return toCard({
    kind: 'UnitPositionsTimeBased',
    automation: 'Orange',
    state: { phase: 'AwaitingReview', content: 'candidate' },
    ready: false,
    regen_attempts: 0,
    last_job_id: 'job-1',
    ...overrides,
  });
}

describe('client-side validation', () => {
  it('blocks rejection without feedback', () => {
    const rejection = validateAction(reviewCard(), { kind: 'reject', feedback: '  ' });
    expect(rejection).not.toBeNull();
    expect(rejection!.field).toBe('feedback');
  });

  it('allows rejection with feedback', () => {
    expect(
      validateAction(reviewCard(), { kind: 'reject', feedback: 'bad route' }),
    ).toBeNull();
  });

  it('bounds option selection', () => {
    const purple = reviewCard({
      automation: 'Purple',
      state: { phase: 'AwaitingSelection', options: ['a', 'b', 'c'] },
    });
    expect(validateAction(purple, { kind: 'select', index: 2 })).toBeNull();
    expect(validateAction(purple, { kind: 'select', index: 3 })).not.toBeNull();
    expect(validateAction(purple, { kind: 'select', index: -1 })).not.toBeNull();
  });

  it('rejects empty edits', () => {
    expect(validateAction(reviewCard(), { kind: 'edit', content: '' })).not.toBeNull();
  });
});

describe('submitAction', () => {
  it('never calls the API when validation fails', async () => {
    let calls = 0;
    const api = {
      reject: async () => {
        calls += 1;
        return { kind: 'x', state: { phase: 'Rejected' }, stale_descendants: [] };
      },
    } as unknown as ApiClient;
    await expect(
      submitAction(api, 's', reviewCard(), { kind: 'reject', feedback: '' }),
    ).rejects.toThrow('feedback');
    expect(calls).toBe(0);
  });

  it('routes each action to its endpoint', async () => {
    const seen: string[] = [];
    const result = { kind: 'x', state: { phase: 'Approved' }, stale_descendants: [] };
    const api = {
      approve: async () => (seen.push('approve'), result),
      reject: async () => (seen.push('reject'), result),
      edit: async () => (seen.push('edit'), result),
      selectOption: async () => (seen.push('select'), result),
    } as unknown as ApiClient;
    const purple = reviewCard({
      automation: 'Purple',
      state: { phase: 'AwaitingSelection', options: ['a', 'b'] },
    });
    await submitAction(api, 's', reviewCard(), { kind: 'approve' });
    await submitAction(api, 's', reviewCard(), { kind: 'reject', feedback: 'f' });
    await submitAction(api, 's', reviewCard(), { kind: 'edit', content: 'c' });
    await submitAction(api, 's', purple, { kind: 'select', index: 1 });
    expect(seen).toEqual(['approve', 'reject', 'edit', 'select']);
  });
});
