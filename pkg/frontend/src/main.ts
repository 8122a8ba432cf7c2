/** DOM wiring for the query console.
 *
 * One in-flight query at a time: the input is disabled while a request is
 * pending so the history stays an honest, ordered log.
 */

import { GatewayClient, GatewayError, QueryResponse } from "./api.js";
import { SessionHistory } from "./history.js";
import {
  SortState,
  renderBackendsUnavailable,
  renderErrorBanner,
  renderHistory,
  renderResultPanel,
  renderSchemaList,
} from "./render.js";

function gatewayBaseUrl(): string {
  const param = new URLSearchParams(window.location.search).get("gateway");
  return param ?? "";
}

const client = new GatewayClient(gatewayBaseUrl());
const history = new SessionHistory(window.sessionStorage);

const form = document.querySelector<HTMLFormElement>("#query-form")!;
const input = document.querySelector<HTMLInputElement>("#question-input")!;
const submit = document.querySelector<HTMLButtonElement>("#query-submit")!;
const resultPanel = document.querySelector<HTMLElement>("#result-panel")!;
const historyPanel = document.querySelector<HTMLElement>("#history-panel")!;
const schemaPanel = document.querySelector<HTMLElement>("#schema-panel")!;
const schemaSearch = document.querySelector<HTMLInputElement>("#schema-search")!;
const healthBanner = document.querySelector<HTMLElement>("#health-banner")!;

let pending = false;
let lastResponse: QueryResponse | null = null;
let lastQuestion = "";
let sort: SortState = { key: "name", ascending: true };
let schemaFields: Awaited<ReturnType<typeof client.schema>> = [];
let foodGroups: string[] = [];

function setPending(value: boolean): void {
  pending = value;
  input.disabled = value;
  submit.disabled = value;
}

function refreshHistory(): void {
  historyPanel.innerHTML = renderHistory(
    history.entries().map((entry) => ({
      question: entry.question,
      tier: entry.tier,
      itemCount: entry.itemCount,
      timestamp: entry.timestamp,
    })),
  );
}

function showResult(): void {
  if (lastResponse) resultPanel.innerHTML = renderResultPanel(lastResponse, sort);
}

async function runQuery(question: string): Promise<void> {
  if (pending || !question.trim()) return;
  setPending(true);
  try {
    const response = await client.query(question);
    lastResponse = response;
    lastQuestion = question;
    sort = { key: "name", ascending: true };
    showResult();
    history.append({
      question,
      filterDocument: JSON.stringify(response.filter_document),
      tier: response.tier,
      itemCount: response.items.length,
      threshold: response.threshold_used,
      timestamp: new Date().toISOString(),
    });
    refreshHistory();
  } catch (error) {
    if (error instanceof GatewayError && error.backendsUnavailable) {
      resultPanel.innerHTML = renderBackendsUnavailable();
    } else {
      const message = error instanceof Error ? error.message : String(error);
      resultPanel.innerHTML = renderErrorBanner(`query failed: ${message}`);
    }
  } finally {
    setPending(false);
  }
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  void runQuery(input.value);
});

resultPanel.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const sortKey = target.closest("th")?.dataset.sortKey;
  if (sortKey) {
    sort =
      sort.key === sortKey
        ? { key: sortKey, ascending: !sort.ascending }
        : { key: sortKey, ascending: true };
    showResult();
    return;
  }
  if (target.dataset.action === "retry" && lastQuestion) {
    void runQuery(lastQuestion);
  }
});

historyPanel.addEventListener("click", (event) => {
  const indexAttr = (event.target as HTMLElement).dataset.historyIndex;
  if (indexAttr === undefined) return;
  const entry = history.at(Number(indexAttr));
  if (entry) {
    input.value = entry.question;
    void runQuery(entry.question); // replay re-issues the query
  }
});

function refreshSchema(): void {
  schemaPanel.innerHTML = renderSchemaList(schemaFields, foodGroups, schemaSearch.value);
}

schemaSearch.addEventListener("input", refreshSchema);

schemaPanel.addEventListener("click", (event) => {
  const name = (event.target as HTMLElement).dataset.fieldName;
  if (!name) return;
  const spacer = input.value && !input.value.endsWith(" ") ? " " : "";
  input.value = `${input.value}${spacer}${name}`;
  input.focus();
});

async function boot(): Promise<void> {
  try {
    const health = await client.health();
    healthBanner.textContent =
      `gateway ok · ${health.store_size} items · ` +
      `llm: ${health.backend_kinds["llm"] ?? "?"} · ` +
      `embedding: ${health.backend_kinds["embedding"] ?? "?"}`;
    healthBanner.className = "health ok";
  } catch {
    healthBanner.textContent = "gateway unreachable";
    healthBanner.className = "health down";
    return;
  }
  [schemaFields, foodGroups] = await Promise.all([client.schema(), client.groups()]);
  refreshSchema();
  refreshHistory();
}

void boot();
