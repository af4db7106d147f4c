import { Code, ManifoldData, MaterialInfo } from "./types.js";

export interface RenderResult {
  code: number[];
  preview_png: string; // base64
  elapsed_ms: number;
}

export interface InvertResult {
  latent: number[];
  extrapolated: boolean;
  preview_png: string;
}

export class ServiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

/** Thin client over the editing service; all state travels with the request. */
export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ServiceError(`service unreachable: ${String(err)}`, 0);
    }
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ServiceError(detail, resp.status);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  materials(): Promise<MaterialInfo[]> {
    return this.request<{ materials: MaterialInfo[] }>("/materials").then(
      (r) => r.materials,
    );
  }

  render(code: Code, scene: object): Promise<RenderResult> {
    return this.post<RenderResult>("/render", { code, scene });
  }

  manifold(): Promise<ManifoldData> {
    return this.request<ManifoldData>("/manifold");
  }

  invert(x: number, y: number, scene: object): Promise<InvertResult> {
    return this.post<InvertResult>("/manifold/invert", { x, y, scene });
  }

  augmentedBase(material: string): Promise<Code> {
    return this.request<{ code: Code }>(
      `/augment/${encodeURIComponent(material)}`,
    ).then((r) => r.code);
  }
}

export function previewUrl(base64Png: string): string {
  return `data:image/png;base64,${base64Png}`;
}
