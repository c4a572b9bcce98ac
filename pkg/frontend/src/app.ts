/**
 * Workbench wiring: poll the service every 2 seconds and re-render.
 *
 * Optimistic UI is deliberately off: the DOM only reflects server
 * responses, and every button click maps to one documented API route.
 */

import { ApiClient, ApiError } from './api.js';
import { buildBoard, toCard, type BlockCard } from './board.js';
import { renderBoard, renderReviewPanel, renderTrace, escapeHtml } from './render.js';
import { submitAction, type ReviewAction } from './review.js';
import { buildTraceView } from './trace.js';

const POLL_INTERVAL_MS = 2000;

interface Ui {
  board: HTMLElement;
  panel: HTMLElement;
  trace: HTMLElement;
  status: HTMLElement;
}

function ui(): Ui {
  const get = (id: string): HTMLElement => {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing #${id}`);
    return el;
  };
  return { board: get('board'), panel: get('panel'), trace: get('trace'),
           status: get('status') };
}

export class Workbench {
  private cards = new Map<string, BlockCard>();
  private openPanel: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly scenarioId: string,
    private readonly dom: Ui,
  ) {}

  async refresh(): Promise<void> {
    try {
      const [blocks, graph] = await Promise.all([
        this.api.blocks(this.scenarioId),
        this.api.graph(this.scenarioId),
      ]);
      this.cards = new Map(blocks.blocks.map((b) => [b.kind, toCard(b)]));
      this.dom.board.innerHTML = renderBoard(buildBoard(blocks.blocks, graph));
      this.dom.status.textContent = `scenario ${this.scenarioId}`;
      if (this.openPanel) this.showPanel(this.openPanel);
    } catch (err) {
      this.showError(err); // board stays interactive with last good render
    }
  }

  private showError(err: unknown): void {
    const message = err instanceof ApiError ? err.message : String(err);
    this.dom.status.innerHTML = `<span class="error">${escapeHtml(message)}</span>`;
  }

  showPanel(kind: string): void {
    const card = this.cards.get(kind);
    if (!card) return;
    this.openPanel = kind;
    this.dom.panel.innerHTML = renderReviewPanel(card);
  }

  async showTrace(kind: string): Promise<void> {
    try {
      const trace = await this.api.trace(this.scenarioId, kind);
      const view = buildTraceView(trace, (ref) =>
        this.api.artifactUrl(this.scenarioId, ref),
      );
      this.dom.trace.innerHTML = renderTrace(view);
    } catch (err) {
      this.showError(err);
    }
  }

  async act(kind: string, action: ReviewAction): Promise<void> {
    const card = this.cards.get(kind);
    if (!card) return;
    const errorBox = this.dom.panel.querySelector('.error');
    try {
      await submitAction(this.api, this.scenarioId, card, action);
      this.openPanel = null;
      this.dom.panel.innerHTML = '';
      await this.refresh();
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      if (errorBox) errorBox.textContent = message;
      else this.showError(err);
    }
  }

  async generate(kind: string): Promise<void> {
    try {
      await this.api.generate(this.scenarioId, kind);
      await this.refresh();
    } catch (err) {
      this.showError(err);
    }
  }

  bind(): void {
    document.addEventListener('click', (event) => {
      const target = event.target as HTMLElement;
      const kind = target.dataset.kind;
      if (!kind) return;
      if (target.classList.contains('generate')) void this.generate(kind);
      if (target.classList.contains('open-review')) this.showPanel(kind);
      if (target.classList.contains('open-trace')) void this.showTrace(kind);
      if (target.classList.contains('do-approve')) {
        void this.act(kind, { kind: 'approve' });
      }
      if (target.classList.contains('do-reject')) {
        const feedback =
          this.dom.panel.querySelector<HTMLTextAreaElement>('.feedback')?.value ?? '';
        void this.act(kind, { kind: 'reject', feedback });
      }
      if (target.classList.contains('do-edit')) {
        const content =
          this.dom.panel.querySelector<HTMLTextAreaElement>('.edit-content')?.value ?? '';
        void this.act(kind, { kind: 'edit', content });
      }
      if (target.classList.contains('do-select')) {
        const chosen = this.dom.panel.querySelector<HTMLInputElement>(
          'input[name="option"]:checked',
        );
        void this.act(kind, { kind: 'select', index: Number(chosen?.value ?? -1) });
      }
    });
  }

  start(): void {
    this.bind();
    void this.refresh();
    setInterval(() => void this.refresh(), POLL_INTERVAL_MS);
  }
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get('api') ?? 'http://127.0.0.1:8080';
  const scenario = params.get('scenario') ?? 'mini-pacific';
  new Workbench(new ApiClient(base), scenario, ui()).start();
}

if (typeof document !== 'undefined' && document.getElementById('board')) {
  boot();
}
