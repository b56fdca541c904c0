// DOM wiring for the annotation screens. All state lives in Session; this
// file only renders it and forwards clicks/keys.

import { makeApi, WireLabel, LABEL_SARCASM, LABEL_NOT_SARCASM, LABEL_UNDECIDED } from "./api.js";
import { Session } from "./session.js";

interface LabelChoice {
  wire: WireLabel;
  text: string;
  key: string;
}

// button captions are for humans; the wire strings go to the server as-is
const CHOICES: LabelChoice[] = [
  { wire: LABEL_SARCASM, text: "Sarcasm", key: "1" },
  { wire: LABEL_NOT_SARCASM, text: "Not Sarcasm", key: "2" },
  { wire: LABEL_UNDECIDED, text: "Undecided", key: "3" },
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function show(id: string, visible: boolean) {
  el(id).classList.toggle("hidden", !visible);
}

function setImage(img: HTMLImageElement, url: string | null) {
  if (url) {
    img.src = url;
    img.classList.remove("hidden");
  } else {
    img.removeAttribute("src");
    img.classList.add("hidden");
  }
}

function labelButtons(container: HTMLElement, hideUndecided: boolean, onPick: (w: WireLabel) => void) {
  container.textContent = "";
  for (const choice of CHOICES) {
    if (hideUndecided && choice.wire === LABEL_UNDECIDED) continue;
    const button = document.createElement("button");
    button.textContent = `${choice.text} [${choice.key}]`;
    button.dataset.wire = choice.wire;
    button.addEventListener("click", () => onPick(choice.wire));
    container.appendChild(button);
  }
}

function main() {
  const api = makeApi((url, init) => fetch(url, init));
  const session = new Session(api, render);

  const joinInput = el<HTMLInputElement>("join-id");
  const bigImage = el<HTMLImageElement>("task-image");
  bigImage.addEventListener("click", () => bigImage.classList.toggle("zoomed"));

  el("join-button").addEventListener("click", () => void session.join(joinInput.value.trim()));
  el("onboarding-submit").addEventListener("click", () => void session.submitOnboarding());
  el("retry-button").addEventListener("click", () => void session.resume());

  document.addEventListener("keydown", (event) => {
    const choice = CHOICES.find((c) => c.key === event.key);
    if (!choice) return;
    if (session.phase === "onboarding") session.answerOnboarding(choice.wire);
    else if (session.phase === "labeling") void session.submitLabel(choice.wire);
  });

  function render() {
    show("banner", session.banner !== null);
    el("banner-text").textContent = session.banner ?? "";
    show("retry-button", session.phase === "paused");

    show("join", session.phase === "join");
    show("onboarding", session.phase === "onboarding");
    show("onboarding-failed", session.phase === "onboarding_failed");
    show("task", session.phase === "labeling" && session.task !== null);
    show("done", session.phase === "done");

    if (session.onboarding) {
      const ob = session.onboarding;
      const answered = ob.answers.filter((a) => a !== null).length;
      el("onboarding-progress").textContent = `${answered} / ${ob.items.length} answered`;
      const item = session.onboardingItem;
      show("onboarding-item", item !== null);
      if (item) {
        el("onboarding-text").textContent = item.text;
        setImage(el<HTMLImageElement>("onboarding-image"), item.image_url);
      }
      const submit = el<HTMLButtonElement>("onboarding-submit");
      submit.disabled = !session.onboardingComplete;
      if (session.phase === "onboarding_failed" && ob.score !== null) {
        el("failed-score").textContent =
          `score ${(ob.score * 100).toFixed(0)}% is below the ${(ob.threshold * 100).toFixed(0)}% gate`;
      }
    }

    const task = session.task;
    if (task) {
      el("task-kind").textContent = task.kind;
      el("task-text").textContent = task.text ?? "";
      setImage(bigImage, task.image_url);
      labelButtons(el("task-buttons"), task.kind === "expert", (wire) => void session.submitLabel(wire));
    }
    el("completed-count").textContent = String(session.completed);

    if (session.phase === "done" && session.progress) {
      el("done-summary").textContent =
        `you labeled ${session.completed} samples; ` +
        `${session.progress.primary_finished} of ${session.progress.primary_total} finished overall`;
    }
  }

  labelButtons(el("onboarding-buttons"), false, (wire) => session.answerOnboarding(wire));
  render();
}

window.addEventListener("load", main);
