/** Pure HTML-string renderers for the console.
 *
 * Everything shown comes straight from the gateway response; no retrieval
 * logic lives here. Keeping these as string -> string functions makes the
 * whole presentation layer testable without a browser.
 */

import type { AttemptInfo, QueryItem, QueryResponse, SchemaField } from "./api.js";

export const BIG8_COLUMNS: ReadonlyArray<{ key: string; label: string }> = [
  { key: "energy", label: "Energy" },
  { key: "protein, total", label: "Protein" },
  { key: "carbohydrates, total", label: "Carbs" },
  { key: "sugars, total", label: "Sugars" },
  { key: "fat, total", label: "Fat" },
  { key: "fat, saturated", label: "Sat. fat" },
  { key: "fibre, total dietary", label: "Fibre" },
  { key: "salt", label: "Salt" },
];

export interface SortState {
  key: string; // "name" | "food_group" | "distance" | a component name
  ascending: boolean;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderFilterDocument(document: Record<string, unknown>): string {
  const pretty = JSON.stringify(document, null, 2);
  return `<pre class="filter-doc">${escapeHtml(pretty)}</pre>`;
}

export function renderTierBadge(tier: string, attempts: AttemptInfo[]): string {
  const log = attempts
    .map((attempt) => `${attempt.tier}: ${attempt.error ?? "ok"}`)
    .join("\n");
  const css = `badge tier-${tier.toLowerCase()}`;
  return `<span class="${css}" title="${escapeHtml(log)}">${escapeHtml(tier)}</span>`;
}

function sortValue(item: QueryItem, key: string): string | number | null {
  if (key === "name") return item.name;
  if (key === "food_group") return item.food_group;
  if (key === "distance") return item.distance;
  return item.components[key] ?? null;
}

export function sortItems(items: QueryItem[], sort: SortState): QueryItem[] {
  const ordered = [...items];
  ordered.sort((a, b) => {
    const left = sortValue(a, sort.key);
    const right = sortValue(b, sort.key);
    if (left === null && right === null) return 0;
    if (left === null) return 1; // missing values sink to the bottom
    if (right === null) return -1;
    let compared: number;
    if (typeof left === "string" || typeof right === "string") {
      compared = String(left).localeCompare(String(right));
    } else {
      compared = left - right;
    }
    return sort.ascending ? compared : -compared;
  });
  return ordered;
}

function formatNumber(value: number | null | undefined, digits: number): string {
  return value === null || value === undefined ? "–" : value.toFixed(digits);
}

export function renderResultsTable(items: QueryItem[], sort: SortState): string {
  const showDistance = items.some((item) => item.distance !== null);
  const columns: Array<{ key: string; label: string }> = [
    { key: "name", label: "Name" },
    { key: "food_group", label: "Food group" },
    ...BIG8_COLUMNS,
  ];
  if (showDistance) columns.push({ key: "distance", label: "Distance" });

  const headers = columns
    .map((column) => {
      const marker =
        column.key === sort.key ? (sort.ascending ? " ▲" : " ▼") : "";
      return `<th data-sort-key="${escapeHtml(column.key)}">${escapeHtml(column.label)}${marker}</th>`;
    })
    .join("");

  const rows = sortItems(items, sort)
    .map((item) => {
      const cells = [
        `<td>${escapeHtml(item.name)}</td>`,
        `<td>${escapeHtml(item.food_group ?? "–")}</td>`,
        ...BIG8_COLUMNS.map(
          (column) => `<td class="num">${formatNumber(item.components[column.key], 2)}</td>`,
        ),
      ];
      if (showDistance) cells.push(`<td class="num">${formatNumber(item.distance, 4)}</td>`);
      return `<tr data-item-id="${escapeHtml(item.id)}">${cells.join("")}</tr>`;
    })
    .join("");

  return `<table class="results"><thead><tr>${headers}</tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderEmptyState(): string {
  return (
    `<div class="empty-state"><strong>0 results</strong>` +
    `<p>The query ran fine; nothing in the corpus satisfies it.</p></div>`
  );
}

export function renderResultPanel(response: QueryResponse, sort: SortState): string {
  const threshold =
    response.threshold_used === null
      ? ""
      : `<span class="threshold">threshold ${response.threshold_used.toFixed(4)}</span>`;
  const header =
    `<div class="result-header">${renderTierBadge(response.tier, response.attempts)}` +
    `${threshold}<span class="count">${response.items.length} item(s)</span>` +
    `<span class="duration">${response.duration_ms.toFixed(0)} ms</span></div>`;
  const filter = renderFilterDocument(response.filter_document);
  const body = response.items.length
    ? renderResultsTable(response.items, sort)
    : renderEmptyState();
  return `${header}${filter}${body}`;
}

export function renderErrorBanner(message: string): string {
  return (
    `<div class="error-banner">${escapeHtml(message)} ` +
    `<button type="button" data-action="retry">Retry</button></div>`
  );
}

export function renderBackendsUnavailable(): string {
  return renderErrorBanner("retrieval backends unavailable");
}

export function renderSchemaList(
  fields: SchemaField[],
  groups: string[],
  search: string,
): string {
  const needle = search.trim().toLowerCase();
  const matching = fields.filter((field) => field.name.includes(needle));
  const fieldItems = matching
    .map((field) => {
      const unit = field.unit ? ` (${field.unit})` : "";
      return (
        `<li><button type="button" data-field-name="${escapeHtml(field.name)}">` +
        `${escapeHtml(field.name)}</button><span class="kind">${field.kind}${unit}</span></li>`
      );
    })
    .join("");
  const groupItems = groups
    .filter((group) => group.toLowerCase().includes(needle))
    .map(
      (group) =>
        `<li><button type="button" data-field-name="${escapeHtml(group)}">` +
        `${escapeHtml(group)}</button></li>`,
    )
    .join("");
  return (
    `<div class="schema-fields"><h3>Components</h3><ul>${fieldItems}</ul></div>` +
    `<div class="schema-groups"><h3>Food groups</h3><ul>${groupItems}</ul></div>`
  );
}

export interface HistoryView {
  question: string;
  tier: string;
  itemCount: number;
  timestamp: string;
}

export function renderHistory(entries: HistoryView[]): string {
  if (!entries.length) return `<p class="history-empty">No queries yet.</p>`;
  const items = [...entries]
    .reverse()
    .map(
      (entry, reversedIndex) =>
        `<li><button type="button" data-history-index="${entries.length - 1 - reversedIndex}">` +
        `${escapeHtml(entry.question)}</button>` +
        `<span class="meta">${escapeHtml(entry.tier)} · ${entry.itemCount}</span></li>`,
    )
    .join("");
  return `<ul class="history-list">${items}</ul>`;
}
