/** Gallery rendering. Items appear exactly in server order; this
 * module never filters, sorts, or drops retrievals.
 */

import type { QueryResponse, Retrieval } from "./api.js";

export interface GalleryCallbacks {
  mediaUrl(r: Retrieval): string;
  onMark(mediaId: string, relevant: boolean | null): void;
  onSubmit(): void;
}

export function renderGallery(
  container: HTMLElement,
  resp: QueryResponse | null,
  draft: ReadonlyMap<string, boolean>,
  cb: GalleryCallbacks,
): void {
  container.textContent = "";
  if (!resp) {
    const hint = document.createElement("p");
    hint.className = "gallery-hint";
    hint.textContent = "Run a query to see results.";
    container.appendChild(hint);
    return;
  }

  container.appendChild(formPanel(resp));

  if (resp.retrievals.length === 0) {
    const empty = document.createElement("p");
    empty.className = "gallery-empty";
    empty.textContent = "No media matched this query.";
    container.appendChild(empty);
  } else {
    const list = document.createElement("ol");
    list.className = "gallery";
    for (const r of resp.retrievals) {
      list.appendChild(galleryItem(r, draft.get(r.media_id), cb));
    }
    container.appendChild(list);
  }

  const bar = document.createElement("div");
  bar.className = "feedback-bar";
  const submit = document.createElement("button");
  submit.type = "button";
  submit.className = "submit-feedback";
  submit.textContent = `Send feedback (${draft.size} marked)`;
  submit.addEventListener("click", () => cb.onSubmit());
  bar.appendChild(submit);
  container.appendChild(bar);
}

function formPanel(resp: QueryResponse): HTMLElement {
  const details = document.createElement("details");
  details.className = "form-panel";
  const summary = document.createElement("summary");
  summary.textContent = "logical form";
  details.appendChild(summary);

  const resolved = document.createElement("p");
  resolved.className = "resolved-text";
  resolved.textContent = `resolved: ${resp.resolved_text}`;
  details.appendChild(resolved);

  const form = document.createElement("pre");
  form.className = "logical-form";
  form.textContent = resp.logical_form;
  details.appendChild(form);
  return details;
}

function galleryItem(
  r: Retrieval,
  marked: boolean | undefined,
  cb: GalleryCallbacks,
): HTMLElement {
  const item = document.createElement("li");
  item.className = "gallery-item";
  item.dataset.mediaId = r.media_id;

  const figure = document.createElement("figure");
  if (r.kind === "video") {
    const video = document.createElement("video");
    video.src = cb.mediaUrl(r);
    video.controls = true;
    video.preload = "none";
    figure.appendChild(video);
  } else {
    const img = document.createElement("img");
    img.src = cb.mediaUrl(r);
    img.alt = r.media_id;
    img.loading = "lazy";
    figure.appendChild(img);
  }
  const caption = document.createElement("figcaption");
  caption.textContent = `${r.media_id} · ${r.timestamp}`;
  figure.appendChild(caption);
  item.appendChild(figure);

  item.appendChild(markButton(r.media_id, "relevant", true, marked === true, cb));
  item.appendChild(markButton(r.media_id, "irrelevant", false, marked === false, cb));
  return item;
}

function markButton(
  mediaId: string,
  label: string,
  meaning: boolean,
  active: boolean,
  cb: GalleryCallbacks,
): HTMLElement {
  const btn = document.createElement("button");
  btn.type = "button";
  btn.className = `mark-${label}`;
  btn.textContent = label;
  btn.setAttribute("aria-pressed", String(active));
  // clicking an active button retracts the mark
  btn.addEventListener("click", () => cb.onMark(mediaId, active ? null : meaning));
  return btn;
}
