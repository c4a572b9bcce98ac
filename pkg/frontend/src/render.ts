/** Pure HTML renderers for the board, review panel, and trace viewer. */

import type { Board, BlockCard } from './board.js';
import type { TraceView } from './trace.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function cardBadges(card: BlockCard): string {
  const badges: string[] = [];
  if (card.ready) badges.push('<span class="badge ready">Ready</span>');
  if (card.stale) badges.push('<span class="badge stale">Stale</span>');
  if (card.needsReview) badges.push('<span class="badge review">Review</span>');
  return badges.join('');
}

export function renderCard(card: BlockCard): string {
  const generate = card.canGenerate
    ? `<button class="generate" data-kind="${escapeHtml(card.kind)}">Generate</button>`
    : '';
  const review = card.needsReview
    ? `<button class="open-review" data-kind="${escapeHtml(card.kind)}">Review…</button>`
    : '';
  const trace = card.lastJobId
    ? `<button class="open-trace" data-kind="${escapeHtml(card.kind)}">Trace</button>`
    : '';
  return (
    `<div class="card ${card.color}" id="card-${escapeHtml(card.kind)}" ` +
    `data-phase="${card.phase}">` +
    `<h3>${escapeHtml(card.kind)}</h3>` +
    `<div class="phase">${card.phase}</div>` +
    `<div class="badges">${cardBadges(card)}</div>` +
    `<div class="actions">${generate}${review}${trace}</div>` +
    `</div>`
  );
}

export function renderBoard(board: Board): string {
  const columns = board.columns
    .map(
      (column) =>
        `<div class="column" data-depth="${column.depth}">` +
        column.cards.map(renderCard).join('') +
        `</div>`,
    )
    .join('');
  const edges = board.edges
    .map(
      (edge) =>
        `<li>${escapeHtml(edge.from)} &rarr; ${escapeHtml(edge.to)}</li>`,
    )
    .join('');
  return (
    `<div class="board">${columns}</div>` +
    `<details class="edges"><summary>${board.edges.length} dependencies</summary>` +
    `<ul>${edges}</ul></details>`
  );
}

export function renderReviewPanel(card: BlockCard): string {
  const content = card.options.length
    ? card.options
        .map(
          (option, i) =>
            `<label class="option"><input type="radio" name="option" value="${i}">` +
            `<pre>${escapeHtml(option)}</pre></label>`,
        )
        .join('')
    : '';
  const selectButton = card.options.length
    ? `<button class="do-select" data-kind="${escapeHtml(card.kind)}">Select option</button>`
    : `<button class="do-approve" data-kind="${escapeHtml(card.kind)}">Approve</button>`;
  return (
    `<div class="review-panel" data-kind="${escapeHtml(card.kind)}">` +
    `<h2>${escapeHtml(card.kind)}</h2>` +
    content +
    `<textarea class="edit-content" placeholder="Edited content"></textarea>` +
    `<textarea class="feedback" placeholder="Rejection feedback (required)"></textarea>` +
    `<div class="error" role="alert"></div>` +
    `<div class="controls">${selectButton}` +
    `<button class="do-reject" data-kind="${escapeHtml(card.kind)}">Reject</button>` +
    `<button class="do-edit" data-kind="${escapeHtml(card.kind)}">Save edit</button>` +
    `</div></div>`
  );
}

export function renderTrace(view: TraceView): string {
  const rows = view.rows
    .map((row) => {
      const marks = [
        row.failed ? '<span class="mark failed">failed</span>' : '',
        row.retried ? '<span class="mark retried">retried</span>' : '',
      ].join('');
      const overlay = row.overlayUrl
        ? `<img class="overlay" src="${escapeHtml(row.overlayUrl)}" ` +
          `alt="overlay ${escapeHtml(row.imageRef ?? '')}">`
        : '';
      return (
        `<section class="step" data-index="${row.index}">` +
        `<header>#${row.index} ${escapeHtml(row.action)}${marks}</header>` +
        `<p class="thought">${escapeHtml(row.thought)}</p>` +
        `<code class="input">${escapeHtml(row.actionInput)}</code>` +
        `<p class="observation">${escapeHtml(row.observationText)}</p>` +
        overlay +
        `</section>`
      );
    })
    .join('');
  const banner =
    view.banner.kind === 'aborted'
      ? `<div class="banner aborted">Aborted: ${escapeHtml(view.banner.reason)}</div>`
      : view.banner.kind === 'answer'
        ? `<div class="banner done">Final answer reached</div>`
        : `<div class="banner running">Running…</div>`;
  return (
    `<div class="trace" data-task="${escapeHtml(view.taskId)}">` +
    `<h2>${escapeHtml(view.taskId)} (${view.budgetUsed} steps)</h2>` +
    banner +
    rows +
    `</div>`
  );
}
