// Thin typed client for the annotation service. Label strings are part of
// the wire contract and must match the server byte-for-byte.

export const LABEL_SARCASM = "Sarcasm";
export const LABEL_NOT_SARCASM = "NotSarcasm";
export const LABEL_UNDECIDED = "Undecided";
export type WireLabel = typeof LABEL_SARCASM | typeof LABEL_NOT_SARCASM | typeof LABEL_UNDECIDED;

export interface TaskView {
  task_id: string;
  sample_id: string;
  kind: string; // primary | double_check | expert
  text: string | null;
  image_ref: string | null;
  image_url: string | null;
}

export interface OnboardingItem {
  sample_id: string;
  text: string;
  image_ref: string | null;
  image_url: string | null;
}

export interface OnboardingBatch {
  items: OnboardingItem[];
  threshold: number;
}

export interface OnboardingResult {
  annotator_id: string;
  score: number;
  passed: boolean;
}

export interface Progress {
  primary_total: number;
  primary_finished: number;
  primary_remaining: number;
  annotators: number;
  events: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  // the server reports failures as {"error": code, "message": text}
  let code = "unknown";
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") code = body.error;
    if (body && typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the status line message
  }
  throw new ApiError(response.status, code, message);
}

export function makeApi(fetchFn: FetchLike, base = "") {
  const postJSON = (url: string, body: unknown) =>
    fetchFn(base + url, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });

  return {
    async register(annotatorId: string): Promise<void> {
      await unwrap(await postJSON("/api/annotators", { annotator_id: annotatorId, role: "worker" }));
    },

    async onboardingBatch(): Promise<OnboardingBatch> {
      return unwrap(await fetchFn(base + "/api/onboarding/batch"));
    },

    async submitOnboarding(annotatorId: string, answers: WireLabel[]): Promise<OnboardingResult> {
      return unwrap(await postJSON("/api/onboarding/answers", { annotator_id: annotatorId, answers }));
    },

    async nextTask(annotatorId: string): Promise<TaskView | null> {
      const payload = await unwrap<{ task: TaskView | null }>(
        await fetchFn(base + `/api/tasks/next?annotator_id=${encodeURIComponent(annotatorId)}`),
      );
      return payload.task;
    },

    async submitLabel(annotatorId: string, taskId: string, label: WireLabel): Promise<void> {
      await unwrap(
        await postJSON(`/api/tasks/${encodeURIComponent(taskId)}/label`, {
          annotator_id: annotatorId,
          label,
        }),
      );
    },

    async progress(): Promise<Progress> {
      return unwrap(await fetchFn(base + "/api/progress"));
    },
  };
}

export type Api = ReturnType<typeof makeApi>;
