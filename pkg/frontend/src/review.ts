/**
 * Review-panel actions with client-side validation.
 *
 * Validation only guards obviously bad submissions (empty rejection
 * feedback, missing option choice); the server's state machine remains the
 * authority and its 422 reasons are surfaced verbatim.
 */

import type { ApiClient, ReviewResult } from './api.js';
import type { BlockCard } from './board.js';

export type ReviewAction =
  | { kind: 'approve' }
  | { kind: 'reject'; feedback: string }
  | { kind: 'edit'; content: string }
  | { kind: 'select'; index: number };

export interface Rejection {
  field: string;
  message: string;
}

export function validateAction(card: BlockCard, action: ReviewAction): Rejection | null {
  if (action.kind === 'reject' && action.feedback.trim() === '') {
    return { field: 'feedback', message: 'rejection requires feedback text' };
  }
  if (action.kind === 'select') {
    if (card.options.length === 0) {
      return { field: 'index', message: 'no options to select from' };
    }
    if (!Number.isInteger(action.index) || action.index < 0 || action.index >= card.options.length) {
      return {
        field: 'index',
        message: `option must be between 1 and ${card.options.length}`,
      };
    }
  }
  if (action.kind === 'edit' && action.content.trim() === '') {
    return { field: 'content', message: 'replacement content must not be empty' };
  }
  return null;
}

export async function submitAction(
  api: ApiClient,
  scenarioId: string,
  card: BlockCard,
  action: ReviewAction,
): Promise<ReviewResult> {
  const rejection = validateAction(card, action);
  if (rejection) {
    throw new Error(`${rejection.field}: ${rejection.message}`);
  }
  switch (action.kind) {
    case 'approve':
      return api.approve(scenarioId, card.kind);
    case 'reject':
      return api.reject(scenarioId, card.kind, action.feedback);
    case 'edit':
      return api.edit(scenarioId, card.kind, action.content);
    case 'select':
      return api.selectOption(scenarioId, card.kind, action.index);
  }
}
