// Thin typed client over the studio service JSON API. All mutation goes
// through here; a fetch implementation can be injected for tests.

import type { HealthView, ProjectView } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export interface ExportResult {
  bytes: Uint8Array;
  serverSha256: string | null;
  filename: string | null;
}

export class StudioApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body?.error ?? response.statusText);
    }
    return body as T;
  }

  health(): Promise<HealthView> {
    return this.request("/health");
  }

  createProject(title: string, lyrics: string[], params: object): Promise<ProjectView> {
    return this.request("/projects", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ title, lyrics, params }),
    });
  }

  getProject(id: string): Promise<ProjectView> {
    return this.request(`/projects/${id}`);
  }

  listProjects(): Promise<{ projects: ProjectView[] }> {
    return this.request("/projects");
  }

  generate(id: string): Promise<ProjectView> {
    return this.request(`/projects/${id}/generate`, { method: "POST" });
  }

  select(id: string, line: number, variant: number): Promise<ProjectView> {
    return this.request(`/projects/${id}/selections`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ selections: { [line]: variant } }),
    });
  }

  /** Download an assembled export; bytes pass through untouched. */
  async exportSong(id: string, format: "midi" | "musicxml"): Promise<ExportResult> {
    const response = await this.fetchImpl(
      `${this.base}/projects/${id}/export?format=${format}`,
    );
    if (!response.ok) {
      const body = await response.json().catch(() => null);
      throw new ApiError(response.status, body?.error ?? response.statusText);
    }
    const bytes = new Uint8Array(await response.arrayBuffer());
    const disposition = response.headers.get("content-disposition");
    const match = disposition?.match(/filename="([^"]+)"/);
    return {
      bytes,
      serverSha256: response.headers.get("x-content-sha256"),
      filename: match ? match[1] : null,
    };
  }
}

/** Hex SHA-256 of downloaded bytes, for comparison with the server header. */
export async function sha256Hex(bytes: Uint8Array): Promise<string> {
  const digest = await crypto.subtle.digest("SHA-256", bytes.slice().buffer);
  return Array.from(new Uint8Array(digest))
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}
