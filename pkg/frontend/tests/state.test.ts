import { describe, expect, it } from "vitest";

import type { QueryResponse } from "../src/api.js";
import { SessionStore } from "../src/state.js";

function response(ids: string[], paramsVersion = 2): QueryResponse {
  return {
    query_id: "q-1",
    resolved_text: "what is there east of the mensa",
    logical_form: "answer(A,(rightOf(A,B),const(B,'mensa')))",
    frame: "user_centric",
    params_version: paramsVersion,
    retrievals: ids.map((id) => ({
      media_id: id,
      kind: "image",
      uri: `/media/${id}`,
      lat: 49.25,
      lon: 7.04,
      timestamp: 20150511,
    })),
  };
}

describe("session mirror", () => {
  it("starts unacknowledged", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    expect(store.current.contextVersion).toBeNull();
    expect(store.current.frame).toBe("geomagnetic");
    expect(store.current.lastQuery).toBeNull();
  });

  it("commits position and heading only on ack", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    store.ackContext(49.3, 7.1, 90, 3);
    expect(store.current.lat).toBe(49.3);
    expect(store.current.headingDeg).toBe(90);
    expect(store.current.contextVersion).toBe(3);
  });

  it("notifies subscribers and honors unsubscribe", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    let seen = 0;
    const off = store.subscribe(() => seen++);
    store.setFrame("user_centric");
    off();
    store.setFrame("geomagnetic");
    expect(seen).toBe(1);
  });

  it("drops session data when the user changes", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    store.ackContext(49.3, 7.1, 0, 1);
    store.setQuery(response(["m1"]));
    store.setUserId("u2");
    expect(store.current.userId).toBe("u2");
    expect(store.current.contextVersion).toBeNull();
    expect(store.current.lastQuery).toBeNull();
    expect(store.current.paramsVersion).toBeNull();
    expect(store.current.draft.size).toBe(0);
  });
});

describe("feedback draft", () => {
  it("rejects marks with no query shown", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    expect(() => store.mark("m1", true)).toThrow(/not part of the shown results/);
  });

  it("rejects marks for media the query did not show", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    store.setQuery(response(["m1", "m2"]));
    expect(() => store.mark("m9", true)).toThrow(/m9/);
  });

  it("sets, flips, and clears marks", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    store.setQuery(response(["m1", "m2"]));
    store.mark("m1", true);
    store.mark("m2", false);
    expect(store.marks()).toEqual([
      { media_id: "m1", relevant: true },
      { media_id: "m2", relevant: false },
    ]);
    store.mark("m1", false);
    store.mark("m2", null);
    expect(store.marks()).toEqual([{ media_id: "m1", relevant: false }]);
  });

  it("lists marks in gallery order no matter the marking order", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    store.setQuery(response(["m1", "m2", "m3"]));
    store.mark("m3", true);
    store.mark("m1", true);
    expect(store.marks().map((m) => m.media_id)).toEqual(["m1", "m3"]);
  });

  it("resets the draft on a new query and on acked feedback", () => {
    const store = new SessionStore("u1", 49.25, 7.04);
    store.setQuery(response(["m1"]));
    store.mark("m1", true);
    store.setQuery(response(["m1"], 3));
    expect(store.current.draft.size).toBe(0);
    expect(store.current.paramsVersion).toBe(3);

    store.mark("m1", false);
    store.ackFeedback(4);
    expect(store.current.draft.size).toBe(0);
    expect(store.current.paramsVersion).toBe(4);
  });
});
