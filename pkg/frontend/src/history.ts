/** Session-scoped query history: append-only, replayable, browser-only.
 *
 * Lives in sessionStorage (injectable for tests) so nothing persists beyond
 * the tab and nothing is sent to the server.
 */

export interface HistoryEntry {
  question: string;
  filterDocument: string;
  tier: string;
  itemCount: number;
  threshold: number | null;
  timestamp: string;
}

interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const STORAGE_KEY = "foodrag-console-history";

export class SessionHistory {
  constructor(private readonly storage: StorageLike) {}

  entries(): HistoryEntry[] {
    const raw = this.storage.getItem(STORAGE_KEY);
    if (!raw) return [];
    try {
      const parsed = JSON.parse(raw) as HistoryEntry[];
      return Array.isArray(parsed) ? parsed : [];
    } catch {
      return [];
    }
  }

  append(entry: HistoryEntry): HistoryEntry[] {
    const entries = this.entries();
    entries.push(entry);
    this.storage.setItem(STORAGE_KEY, JSON.stringify(entries));
    return entries;
  }

  at(index: number): HistoryEntry | undefined {
    return this.entries()[index];
  }
}
