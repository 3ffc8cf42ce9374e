import { beforeEach, describe, expect, it, vi } from "vitest";

import type { QueryResponse, Retrieval } from "../src/api.js";
import { renderGallery } from "../src/gallery.js";
import type { GalleryCallbacks } from "../src/gallery.js";

function response(overrides: Partial<QueryResponse> = {}): QueryResponse {
  const ids = ["m2", "m1", "m3"];
  return {
    query_id: "q-1",
    resolved_text: "what is there east of the mensa",
    logical_form: "answer(A,(rightOf(A,B),const(B,'mensa')))",
    frame: "user_centric",
    params_version: 2,
    retrievals: ids.map((id, i) => ({
      media_id: id,
      kind: i === 2 ? "video" : "image",
      uri: `/media/${id}`,
      lat: 49.25,
      lon: 7.04,
      timestamp: 20150511,
    })),
    ...overrides,
  };
}

function callbacks(): GalleryCallbacks {
  return {
    mediaUrl: (r: Retrieval) => `http://api.test${r.uri}`,
    onMark: vi.fn(),
    onSubmit: vi.fn(),
  };
}

let root: HTMLElement;
beforeEach(() => {
  document.body.innerHTML = "<div id='g'></div>";
  root = document.getElementById("g")!;
});

describe("rendering", () => {
  it("shows a hint before any query", () => {
    renderGallery(root, null, new Map(), callbacks());
    expect(root.querySelector(".gallery-hint")?.textContent).toMatch(/run a query/i);
    expect(root.querySelector(".gallery")).toBeNull();
  });

  it("keeps items exactly in server order", () => {
    renderGallery(root, response(), new Map(), callbacks());
    const ids = [...root.querySelectorAll<HTMLElement>(".gallery-item")].map(
      (li) => li.dataset.mediaId,
    );
    expect(ids).toEqual(["m2", "m1", "m3"]);
  });

  it("renders the logical form in a collapsible panel", () => {
    renderGallery(root, response(), new Map(), callbacks());
    const panel = root.querySelector<HTMLDetailsElement>("details.form-panel");
    expect(panel).not.toBeNull();
    expect(panel!.open).toBe(false);
    expect(panel!.querySelector(".logical-form")?.textContent).toBe(
      "answer(A,(rightOf(A,B),const(B,'mensa')))",
    );
    expect(panel!.querySelector(".resolved-text")?.textContent).toContain(
      "what is there east of the mensa",
    );
  });

  it("uses the media url for images and a video element for clips", () => {
    renderGallery(root, response(), new Map(), callbacks());
    const img = root.querySelector<HTMLImageElement>("[data-media-id='m2'] img");
    expect(img?.src).toBe("http://api.test/media/m2");
    expect(root.querySelector("[data-media-id='m3'] video")).not.toBeNull();
    expect(root.querySelector("[data-media-id='m3'] img")).toBeNull();
  });

  it("says so when nothing matched", () => {
    renderGallery(root, response({ retrievals: [] }), new Map(), callbacks());
    expect(root.querySelector(".gallery-empty")).not.toBeNull();
    expect(root.querySelectorAll(".gallery-item")).toHaveLength(0);
    // feedback stays available: submitting nothing is the demotion verdict
    expect(root.querySelector(".submit-feedback")).not.toBeNull();
  });
});

describe("marking", () => {
  it("reports a fresh mark and retracts an active one", () => {
    const cb = callbacks();
    renderGallery(root, response(), new Map([["m1", true]]), cb);
    root.querySelector<HTMLElement>("[data-media-id='m2'] .mark-relevant")!.click();
    expect(cb.onMark).toHaveBeenCalledWith("m2", true);
    root.querySelector<HTMLElement>("[data-media-id='m1'] .mark-relevant")!.click();
    expect(cb.onMark).toHaveBeenCalledWith("m1", null);
  });

  it("mirrors the draft in aria-pressed", () => {
    renderGallery(root, response(), new Map([["m1", false]]), callbacks());
    const item = root.querySelector("[data-media-id='m1']")!;
    expect(item.querySelector(".mark-irrelevant")?.getAttribute("aria-pressed")).toBe("true");
    expect(item.querySelector(".mark-relevant")?.getAttribute("aria-pressed")).toBe("false");
  });

  it("counts marks on the submit button and forwards clicks", () => {
    const cb = callbacks();
    const draft = new Map([
      ["m1", true],
      ["m3", false],
    ]);
    renderGallery(root, response(), draft, cb);
    const submit = root.querySelector<HTMLElement>(".submit-feedback")!;
    expect(submit.textContent).toContain("2 marked");
    submit.click();
    expect(cb.onSubmit).toHaveBeenCalledOnce();
  });
});
