/**
 * Step-through trace viewer view model: one row per ReAct step with its
 * Thought/Action/Input/Observation, inline overlay URLs for observations
 * that carry an image_ref, and a terminal banner for aborted tasks.
 */

import type { TraceWire } from './model.js';

export interface TraceRow {
  index: number;
  thought: string;
  action: string;
  actionInput: string;
  observationText: string;
  overlayUrl: string | null;
  imageRef: string | null;
  failed: boolean;
  retried: boolean;
}

export interface TraceView {
  taskId: string;
  rows: TraceRow[];
  budgetUsed: number;
  banner: { kind: 'answer' } | { kind: 'aborted'; reason: string } | { kind: 'running' };
  inlineOverlays: number;
}

export function buildTraceView(
  trace: TraceWire,
  artifactUrl: (imageRef: string) => string,
): TraceView {
  const rows = trace.steps.map((step) => ({
    index: step.index,
    thought: step.thought,
    action: step.action,
    actionInput: JSON.stringify(step.action_input),
    observationText: step.observation.text,
    overlayUrl: step.observation.image_ref
      ? artifactUrl(step.observation.image_ref)
      : null,
    imageRef: step.observation.image_ref ?? null,
    failed: step.status === 'Failed' || step.observation.error,
    retried: step.status === 'Retried',
  }));
  let banner: TraceView['banner'] = { kind: 'running' };
  if (trace.final?.type === 'answer') banner = { kind: 'answer' };
  if (trace.final?.type === 'aborted') {
    banner = { kind: 'aborted', reason: trace.final.reason };
  }
  return {
    taskId: trace.task_id,
    rows,
    budgetUsed: trace.budget_used,
    banner,
    inlineOverlays: rows.filter((r) => r.overlayUrl !== null).length,
  };
}
