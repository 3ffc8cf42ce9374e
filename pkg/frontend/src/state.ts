/** Session state, mirroring the server after each acknowledged call.
 *
 * Position, heading, and context version change only via ackContext,
 * so a failed request leaves the mirror untouched. The feedback draft
 * may reference only media shown by the last query.
 */

import type { Frame, Mark, QueryResponse } from "./api.js";

export interface SessionState {
  userId: string;
  lat: number;
  lon: number;
  headingDeg: number;
  frame: Frame;
  contextVersion: number | null;
  lastQuery: QueryResponse | null;
  paramsVersion: number | null;
  draft: ReadonlyMap<string, boolean>;
}

export type Listener = (state: SessionState) => void;

export class SessionStore {
  private state: SessionState;
  private listeners: Listener[] = [];

  constructor(userId: string, lat: number, lon: number) {
    this.state = {
      userId,
      lat,
      lon,
      headingDeg: 0,
      frame: "geomagnetic",
      contextVersion: null,
      lastQuery: null,
      paramsVersion: null,
      draft: new Map(),
    };
  }

  get current(): SessionState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private set(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  /** Switching identity drops everything tied to the old user. */
  setUserId(userId: string): void {
    this.set({
      userId,
      contextVersion: null,
      lastQuery: null,
      paramsVersion: null,
      draft: new Map(),
    });
  }

  setFrame(frame: Frame): void {
    this.set({ frame });
  }

  ackContext(lat: number, lon: number, headingDeg: number, version: number): void {
    this.set({ lat, lon, headingDeg, contextVersion: version });
  }

  setQuery(resp: QueryResponse): void {
    this.set({ lastQuery: resp, paramsVersion: resp.params_version, draft: new Map() });
  }

  /** relevant true/false marks the item, null clears the mark. */
  mark(mediaId: string, relevant: boolean | null): void {
    const last = this.state.lastQuery;
    if (!last || !last.retrievals.some((r) => r.media_id === mediaId)) {
      throw new Error(`cannot mark ${mediaId}: not part of the shown results`);
    }
    const draft = new Map(this.state.draft);
    if (relevant === null) {
      draft.delete(mediaId);
    } else {
      draft.set(mediaId, relevant);
    }
    this.set({ draft });
  }

  /** Draft as a marks list, in gallery order. */
  marks(): Mark[] {
    const last = this.state.lastQuery;
    if (!last) return [];
    const out: Mark[] = [];
    for (const r of last.retrievals) {
      const flag = this.state.draft.get(r.media_id);
      if (flag !== undefined) out.push({ media_id: r.media_id, relevant: flag });
    }
    return out;
  }

  /** Feedback landed; the draft has been consumed. */
  ackFeedback(paramsVersion: number): void {
    this.set({ paramsVersion, draft: new Map() });
  }
}
