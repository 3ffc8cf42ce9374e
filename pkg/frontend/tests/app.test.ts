import { beforeEach, describe, expect, it, vi } from "vitest";

import type { ApiClient, ContextRequest, QueryResponse } from "../src/api.js";
import { ApiError } from "../src/api.js";
import { App } from "../src/app.js";

const CENTER = { lat: 49.2556, lon: 7.0452 };

function queryResponse(ids: string[], paramsVersion = 2): QueryResponse {
  return {
    query_id: "q-1",
    resolved_text: "what is there east of the mensa",
    logical_form: "answer(A,(rightOf(A,B),const(B,'mensa')))",
    frame: "geomagnetic",
    params_version: paramsVersion,
    retrievals: ids.map((id) => ({
      media_id: id,
      kind: "image",
      uri: `/media/${id}`,
      lat: CENTER.lat,
      lon: CENTER.lon,
      timestamp: 20150511,
    })),
  };
}

interface Fake {
  setContext: ReturnType<typeof vi.fn>;
  query: ReturnType<typeof vi.fn>;
  feedback: ReturnType<typeof vi.fn>;
  mediaUrl: ReturnType<typeof vi.fn>;
}

function fakeClient(): Fake {
  let version = 0;
  return {
    setContext: vi.fn(async (_body: ContextRequest) => ({ version: ++version })),
    query: vi.fn(async () => queryResponse(["m1", "m2"])),
    feedback: vi.fn(async () => ({ params_version: 3 })),
    mediaUrl: vi.fn((r: { uri: string }) => `http://api.test${r.uri}`),
  };
}

let root: HTMLElement;
let fake: Fake;
let app: App;

function banner(): HTMLElement {
  return root.querySelector<HTMLElement>("#banner")!;
}

function chip(id: string): string {
  return root.querySelector(`#${id}`)!.textContent ?? "";
}

async function placeAndQuery(text = "what is in front of the mensa"): Promise<void> {
  app.placeUser(CENTER.lat, CENTER.lon);
  app.runQuery(text);
  await app.whenIdle();
}

beforeEach(() => {
  document.body.innerHTML = "<div id='app'></div>";
  root = document.getElementById("app")!;
  fake = fakeClient();
  app = new App(
    root,
    { apiBase: "http://api.test", tileUrl: "t/{z}/{x}/{y}.png" },
    { client: fake as unknown as ApiClient, mapWidth: 512, mapHeight: 384 },
  );
});

describe("context", () => {
  it("starts unacknowledged with a hidden marker", () => {
    expect(chip("context-version")).toBe("context –");
    expect(chip("params-version")).toBe("params –");
    expect(root.querySelector<HTMLElement>(".map-marker")!.hidden).toBe(true);
  });

  it("acks placement, shows the version, and renders the marker", async () => {
    app.placeUser(49.256, 7.046);
    await app.whenIdle();
    expect(fake.setContext).toHaveBeenCalledWith({
      user_id: "explorer",
      lat: 49.256,
      lon: 7.046,
      heading_deg: 0,
    });
    expect(chip("context-version")).toBe("context v1");
    expect(root.querySelector<HTMLElement>(".map-marker")!.hidden).toBe(false);
  });

  it("leaves everything unchanged when the server is unreachable", async () => {
    fake.setContext.mockRejectedValueOnce(new TypeError("fetch failed"));
    app.placeUser(49.256, 7.046);
    await app.whenIdle();
    expect(banner().hidden).toBe(false);
    expect(banner().textContent).toContain("Server unreachable");
    expect(app.store.current.contextVersion).toBeNull();
    expect(chip("context-version")).toBe("context –");
    expect(root.querySelector<HTMLElement>(".map-marker")!.hidden).toBe(true);
  });

  it("commits a dial change as a new context", async () => {
    app.placeUser(CENTER.lat, CENTER.lon);
    await app.whenIdle();
    const dial = root.querySelector<HTMLInputElement>(".dial input")!;
    dial.value = "90";
    dial.dispatchEvent(new Event("change"));
    await app.whenIdle();
    expect(fake.setContext).toHaveBeenLastCalledWith({
      user_id: "explorer",
      lat: CENTER.lat,
      lon: CENTER.lon,
      heading_deg: 90,
    });
    expect(app.store.current.headingDeg).toBe(90);
    expect(root.querySelector<HTMLElement>(".map-arrow")!.style.transform).toBe("rotate(90deg)");
  });
});

describe("queries", () => {
  it("refuses to query before the context is acknowledged", async () => {
    app.runQuery("what is near the mensa");
    await app.whenIdle();
    expect(fake.query).not.toHaveBeenCalled();
    expect(banner().textContent).toContain("Place yourself on the map first");
  });

  it("renders gallery, badge, and map dots from the response", async () => {
    await placeAndQuery();
    expect(fake.query).toHaveBeenCalledWith({
      user_id: "explorer",
      text: "what is in front of the mensa",
      frame: "geomagnetic",
    });
    const ids = [...root.querySelectorAll<HTMLElement>(".gallery-item")].map(
      (li) => li.dataset.mediaId,
    );
    expect(ids).toEqual(["m1", "m2"]);
    expect(chip("params-version")).toBe("params v2");
    expect(root.querySelectorAll(".map-dot")).toHaveLength(2);
    expect(banner().hidden).toBe(true);
  });

  it("sends the toggled frame", async () => {
    const select = root.querySelector<HTMLSelectElement>("#frame")!;
    select.value = "user_centric";
    select.dispatchEvent(new Event("change"));
    await placeAndQuery();
    expect(fake.query.mock.calls[0][0].frame).toBe("user_centric");
  });

  it("submits through the form", async () => {
    app.placeUser(CENTER.lat, CENTER.lon);
    await app.whenIdle();
    root.querySelector<HTMLInputElement>("#query-text")!.value = "what is near the mensa";
    root
      .querySelector<HTMLFormElement>("#query-form")!
      .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await app.whenIdle();
    expect(fake.query).toHaveBeenCalledWith({
      user_id: "explorer",
      text: "what is near the mensa",
      frame: "geomagnetic",
    });
  });

  it("explains uninterpretable queries with the resolved text", async () => {
    fake.query.mockRejectedValueOnce(
      new ApiError(422, "no_candidates", "no candidate parses for query", {
        resolved_text: "qwerty asdf",
      }),
    );
    await placeAndQuery("qwerty asdf");
    expect(banner().textContent).toContain("I couldn't interpret that");
    expect(banner().textContent).toContain("qwerty asdf");
    expect(app.store.current.lastQuery).toBeNull();
    expect(root.querySelector(".gallery-hint")).not.toBeNull();
  });
});

describe("feedback", () => {
  it("sends marks in gallery order and bumps the badge", async () => {
    await placeAndQuery();
    root.querySelector<HTMLElement>("[data-media-id='m2'] .mark-irrelevant")!.click();
    root.querySelector<HTMLElement>("[data-media-id='m1'] .mark-relevant")!.click();
    root.querySelector<HTMLElement>(".submit-feedback")!.click();
    await app.whenIdle();
    expect(fake.feedback).toHaveBeenCalledWith({
      user_id: "explorer",
      query_id: "q-1",
      marks: [
        { media_id: "m1", relevant: true },
        { media_id: "m2", relevant: false },
      ],
    });
    expect(chip("params-version")).toBe("params v3");
    // draft consumed: no button stays pressed
    expect(root.querySelectorAll("[aria-pressed='true']")).toHaveLength(0);
  });

  it("preserves the draft when the submission fails", async () => {
    fake.feedback.mockRejectedValueOnce(new ApiError(400, "unshown_mark", "stale gallery"));
    await placeAndQuery();
    root.querySelector<HTMLElement>("[data-media-id='m1'] .mark-relevant")!.click();
    root.querySelector<HTMLElement>(".submit-feedback")!.click();
    await app.whenIdle();
    expect(banner().textContent).toContain("unshown_mark");
    expect(app.store.marks()).toEqual([{ media_id: "m1", relevant: true }]);
    expect(
      root
        .querySelector("[data-media-id='m1'] .mark-relevant")!
        .getAttribute("aria-pressed"),
    ).toBe("true");
  });
});

describe("identity", () => {
  it("resets the session when the user changes", async () => {
    await placeAndQuery();
    const field = root.querySelector<HTMLInputElement>("#user-id")!;
    field.value = "other";
    field.dispatchEvent(new Event("change"));
    expect(app.store.current.userId).toBe("other");
    expect(chip("context-version")).toBe("context –");
    expect(chip("params-version")).toBe("params –");
    expect(root.querySelector(".gallery-hint")).not.toBeNull();
  });
});
