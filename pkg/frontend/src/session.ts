// Annotator session state machine, kept free of DOM concerns so it can be
// exercised headlessly. The server stays the source of truth: one submitted
// label per click, conflicts discard the local task, and a refresh resumes
// from whatever the server still has assigned.

import { Api, ApiError, OnboardingItem, TaskView, WireLabel, Progress } from "./api.js";

export type Phase =
  | "join"
  | "onboarding"
  | "onboarding_failed"
  | "labeling"
  | "done"
  | "paused";

export interface OnboardingState {
  items: OnboardingItem[];
  answers: (WireLabel | null)[];
  index: number;
  threshold: number;
  score: number | null;
}

function isNetworkError(err: unknown): boolean {
  return !(err instanceof ApiError);
}

export class Session {
  phase: Phase = "join";
  annotatorId = "";
  onboarding: OnboardingState | null = null;
  task: TaskView | null = null;
  completed = 0;
  progress: Progress | null = null;
  banner: string | null = null;

  private submitting = false;
  private pendingRetry: (() => Promise<void>) | null = null;

  constructor(
    private api: Api,
    private onChange: () => void = () => {},
  ) {}

  private notify() {
    this.onChange();
  }

  private pause(retry: () => Promise<void>) {
    this.banner = "server unreachable; your work is kept, retry when it is back";
    this.phase = "paused";
    this.pendingRetry = retry;
    this.notify();
  }

  /** Retry whatever the last failed server call was. */
  async resume(): Promise<void> {
    const retry = this.pendingRetry;
    if (this.phase !== "paused" || retry === null) return;
    this.banner = null;
    this.pendingRetry = null;
    await retry();
  }

  async join(annotatorId: string): Promise<void> {
    if (this.phase !== "join" || !annotatorId) return;
    try {
      await this.api.register(annotatorId);
      this.annotatorId = annotatorId;
      const batch = await this.api.onboardingBatch();
      this.onboarding = {
        items: batch.items,
        answers: batch.items.map(() => null),
        index: 0,
        threshold: batch.threshold,
        score: null,
      };
      this.phase = "onboarding";
    } catch (err) {
      if (isNetworkError(err)) {
        this.pause(() => {
          this.phase = "join";
          return this.join(annotatorId);
        });
        return;
      }
      this.banner = (err as ApiError).message;
    }
    this.notify();
  }

  get onboardingItem(): OnboardingItem | null {
    const ob = this.onboarding;
    if (!ob || ob.index >= ob.items.length) return null;
    return ob.items[ob.index];
  }

  get onboardingComplete(): boolean {
    const ob = this.onboarding;
    return !!ob && ob.answers.every((a) => a !== null);
  }

  /** Record the answer for the current onboarding item and advance. */
  answerOnboarding(label: WireLabel): void {
    const ob = this.onboarding;
    if (this.phase !== "onboarding" || !ob || ob.index >= ob.items.length) return;
    ob.answers[ob.index] = label;
    ob.index += 1;
    this.notify();
  }

  /** One-shot submit; disabled until every item is answered. */
  async submitOnboarding(): Promise<void> {
    const ob = this.onboarding;
    if (this.phase !== "onboarding" || !ob || !this.onboardingComplete || this.submitting) return;
    this.submitting = true;
    try {
      const result = await this.api.submitOnboarding(this.annotatorId, ob.answers as WireLabel[]);
      ob.score = result.score;
      if (result.passed) {
        this.phase = "labeling";
        this.notify();
        await this.fetchNext();
      } else {
        this.phase = "onboarding_failed";
        this.notify();
      }
    } catch (err) {
      if (isNetworkError(err)) {
        // answers stay local; the retry re-submits the same batch
        this.pause(() => {
          this.phase = "onboarding";
          return this.submitOnboarding();
        });
      } else {
        this.banner = (err as ApiError).message;
        this.notify();
      }
    } finally {
      this.submitting = false;
    }
  }

  async fetchNext(): Promise<void> {
    if (this.phase !== "labeling") return;
    try {
      this.task = await this.api.nextTask(this.annotatorId);
      if (this.task === null) {
        this.progress = await this.api.progress();
        this.phase = "done";
      }
    } catch (err) {
      if (isNetworkError(err)) {
        this.pause(() => {
          this.phase = "labeling";
          return this.fetchNext();
        });
        return;
      }
      this.banner = (err as ApiError).message;
    }
    this.notify();
  }

  /** Submit the label for the held task; a second click is a no-op. */
  async submitLabel(label: WireLabel): Promise<void> {
    const task = this.task;
    if (this.phase !== "labeling" || task === null || this.submitting) return;
    this.submitting = true;
    try {
      await this.api.submitLabel(this.annotatorId, task.task_id, label);
      this.completed += 1;
      this.task = null;
      this.notify();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // task went to someone else (or was already finished): drop it
        this.task = null;
        this.banner = "task was reassigned; fetching the next one";
        this.notify();
      } else if (isNetworkError(err)) {
        // keep the task on screen so the click can be retried
        this.pause(() => {
          this.phase = "labeling";
          return this.submitLabel(label);
        });
        return;
      } else {
        this.banner = (err as ApiError).message;
        this.notify();
        return;
      }
    } finally {
      this.submitting = false;
    }
    await this.fetchNext();
  }
}
