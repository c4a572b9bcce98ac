/** Types mirroring the review-service wire formats. */

export type Automation = 'Green' | 'Orange' | 'Purple';

export type PhaseName =
  | 'Pending'
  | 'Ready'
  | 'Generating'
  | 'AwaitingReview'
  | 'AwaitingSelection'
  | 'Approved'
  | 'Rejected'
  | 'Stale';

export interface BlockStateWire {
  phase: PhaseName;
  content?: string;
  options?: string[];
  feedback?: string;
}

export interface BlockWire {
  kind: string;
  automation: Automation;
  state: BlockStateWire;
  ready: boolean;
  regen_attempts: number;
  last_job_id: string | null;
}

export interface BlocksResponse {
  scenario_id: string;
  blocks: BlockWire[];
}

export interface GraphWire {
  nodes: string[];
  edges: [string, string][];
}

export interface JobWire {
  id: string;
  scenario_id: string;
  kind: string;
  state: 'Queued' | 'Running' | 'Done' | 'Failed';
  reason: string | null;
  trace_id: string | null;
}

export interface ObservationWire {
  text: string;
  error: boolean;
  image_ref?: string;
  payload?: unknown;
  reason?: string;
  low_evidence?: boolean;
}

export interface TraceStepWire {
  index: number;
  thought: string;
  action: string;
  action_input: Record<string, unknown>;
  observation: ObservationWire;
  status: 'Ok' | 'Failed' | 'Retried';
}

export interface TraceWire {
  task_id: string;
  steps: TraceStepWire[];
  final: { type: 'answer'; payload: unknown } | { type: 'aborted'; reason: string } | null;
  budget_used: number;
}
