import { ApiClient, type FetchLike } from "../src/api";

/**
 * The service holds session state (visibility, current threshold); put it
 * back to defaults so test files are order-independent.
 */
export async function resetServer(base: string): Promise<void> {
  const api = new ApiClient(base);
  const summary = await api.run();
  await api.setVisibility(summary.manifest.iteration_keys);
  const model = await api.archetypes();
  if (model.threshold !== model.default_threshold) {
    await api.setThreshold(model.default_threshold);
  }
}

export interface RequestLogEntry {
  url: string;
  method: string;
}

/** fetch wrapper that records every request issued through it. */
export function countingFetch(log: RequestLogEntry[]): FetchLike {
  return (url, init) => {
    log.push({ url, method: init?.method ?? "GET" });
    return fetch(url, init);
  };
}
