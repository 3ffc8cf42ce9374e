/** Wires map, dial, query box, and gallery to the service client.
 *
 * Server actions run strictly one at a time on a promise chain, and
 * session state commits only from acknowledged responses, so a failed
 * call leaves both the mirror and the widgets where they were.
 */

import { ApiClient, ApiError } from "./api.js";
import type { Frame } from "./api.js";
import type { AppConfig } from "./config.js";
import { HeadingDial } from "./dial.js";
import { renderGallery } from "./gallery.js";
import { SlippyMap } from "./map.js";
import { SessionStore } from "./state.js";

const DEFAULT_CENTER = { lat: 49.2556, lon: 7.0452 };
const DEFAULT_USER = "explorer";

export interface AppOptions {
  client?: ApiClient;
  mapWidth?: number;
  mapHeight?: number;
}

export class App {
  readonly store: SessionStore;
  readonly client: ApiClient;
  readonly map: SlippyMap;

  private readonly dial: HeadingDial;
  private readonly banner: HTMLElement;
  private readonly contextChip: HTMLElement;
  private readonly badge: HTMLElement;
  private readonly queryInput: HTMLInputElement;
  private readonly galleryRoot: HTMLElement;
  private tail: Promise<void> = Promise.resolve();

  constructor(root: HTMLElement, config: AppConfig, opts: AppOptions = {}) {
    this.client = opts.client ?? new ApiClient(config.apiBase);
    this.store = new SessionStore(DEFAULT_USER, DEFAULT_CENTER.lat, DEFAULT_CENTER.lon);

    const header = el("header", "app-header");
    const title = el("h1");
    title.textContent = "geomedia explorer";
    header.appendChild(title);

    const userLabel = el("label", "user-field");
    userLabel.append("user ");
    const userInput = document.createElement("input");
    userInput.type = "text";
    userInput.id = "user-id";
    userInput.value = DEFAULT_USER;
    userLabel.appendChild(userInput);
    header.appendChild(userLabel);

    this.contextChip = el("span", "chip");
    this.contextChip.id = "context-version";
    this.contextChip.textContent = "context –";
    header.appendChild(this.contextChip);

    this.badge = el("span", "chip");
    this.badge.id = "params-version";
    this.badge.textContent = "params –";
    header.appendChild(this.badge);
    root.appendChild(header);

    this.banner = el("div", "banner");
    this.banner.id = "banner";
    this.banner.hidden = true;
    root.appendChild(this.banner);

    const mapBox = el("div");
    mapBox.id = "map";
    root.appendChild(mapBox);
    this.map = new SlippyMap(mapBox, {
      tileUrl: config.tileUrl,
      centerLat: DEFAULT_CENTER.lat,
      centerLon: DEFAULT_CENTER.lon,
      width: opts.mapWidth,
      height: opts.mapHeight,
      onPlace: (lat, lon) => this.placeUser(lat, lon),
    });

    const controls = el("div", "controls");
    this.dial = new HeadingDial(controls, (deg) => this.setHeading(deg));

    const frameLabel = el("label", "frame-field");
    frameLabel.append("frame ");
    const frameSelect = document.createElement("select");
    frameSelect.id = "frame";
    for (const frame of ["geomagnetic", "user_centric"]) {
      const option = document.createElement("option");
      option.value = frame;
      option.textContent = frame;
      frameSelect.appendChild(option);
    }
    frameLabel.appendChild(frameSelect);
    controls.appendChild(frameLabel);
    root.appendChild(controls);

    const queryForm = el("form", "query-form");
    queryForm.id = "query-form";
    this.queryInput = document.createElement("input");
    this.queryInput.type = "text";
    this.queryInput.id = "query-text";
    this.queryInput.placeholder = "what is in front of the mensa?";
    queryForm.appendChild(this.queryInput);
    const runButton = document.createElement("button");
    runButton.type = "submit";
    runButton.textContent = "ask";
    queryForm.appendChild(runButton);
    root.appendChild(queryForm);

    this.galleryRoot = el("section", "gallery-root");
    this.galleryRoot.id = "gallery-root";
    root.appendChild(this.galleryRoot);

    userInput.addEventListener("change", () => {
      this.store.setUserId(userInput.value.trim() || DEFAULT_USER);
    });
    frameSelect.addEventListener("change", () => {
      this.store.setFrame(frameSelect.value as Frame);
    });
    queryForm.addEventListener("submit", (ev) => {
      ev.preventDefault();
      this.runQuery(this.queryInput.value);
    });

    this.store.subscribe(() => this.render());
    this.render();
  }

  /** Resolves once every queued server action has settled. */
  async whenIdle(): Promise<void> {
    let tail;
    do {
      tail = this.tail;
      await tail;
    } while (tail !== this.tail);
  }

  placeUser(lat: number, lon: number): void {
    this.sendContext(lat, lon, this.store.current.headingDeg);
  }

  setHeading(deg: number): void {
    const { lat, lon } = this.store.current;
    this.sendContext(lat, lon, deg);
  }

  runQuery(text: string): void {
    this.enqueue(async () => {
      const state = this.store.current;
      if (state.contextVersion === null) {
        this.showBanner("Place yourself on the map first.");
        return;
      }
      const resp = await this.client.query({
        user_id: state.userId,
        text,
        frame: state.frame,
      });
      this.clearBanner();
      this.store.setQuery(resp);
      this.map.setMedia(
        resp.retrievals.map((r) => ({ id: r.media_id, lat: r.lat, lon: r.lon })),
      );
    });
  }

  submitFeedback(): void {
    this.enqueue(async () => {
      const state = this.store.current;
      if (!state.lastQuery) return;
      const resp = await this.client.feedback({
        user_id: state.userId,
        query_id: state.lastQuery.query_id,
        marks: this.store.marks(),
      });
      this.clearBanner();
      this.store.ackFeedback(resp.params_version);
    });
  }

  private sendContext(lat: number, lon: number, headingDeg: number): void {
    this.enqueue(async () => {
      const resp = await this.client.setContext({
        user_id: this.store.current.userId,
        lat,
        lon,
        heading_deg: headingDeg,
      });
      this.clearBanner();
      this.store.ackContext(lat, lon, headingDeg, resp.version);
      this.map.panTo(lat, lon);
    });
  }

  private enqueue(action: () => Promise<void>): void {
    this.tail = this.tail.then(action).catch((err) => {
      this.showBanner(describe(err));
      this.render();
    });
  }

  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
  }

  private clearBanner(): void {
    this.banner.textContent = "";
    this.banner.hidden = true;
  }

  private render(): void {
    const state = this.store.current;
    this.contextChip.textContent =
      state.contextVersion === null ? "context –" : `context v${state.contextVersion}`;
    this.badge.textContent =
      state.paramsVersion === null ? "params –" : `params v${state.paramsVersion}`;
    this.dial.value = state.headingDeg;
    if (state.contextVersion !== null) {
      this.map.setUser(state.lat, state.lon, state.headingDeg);
    }
    renderGallery(this.galleryRoot, state.lastQuery, state.draft, {
      mediaUrl: (r) => this.client.mediaUrl(r),
      onMark: (id, relevant) => this.store.mark(id, relevant),
      onSubmit: () => this.submitFeedback(),
    });
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    if (err.status === 422) {
      const detail = err.detail as { resolved_text?: string } | null;
      const resolved = detail && typeof detail === "object" ? detail.resolved_text : undefined;
      return resolved
        ? `I couldn't interpret that (heard: "${resolved}").`
        : `I couldn't interpret that: ${err.message}.`;
    }
    return `${err.message} (${err.code})`;
  }
  return err instanceof Error ? `Server unreachable: ${err.message}` : String(err);
}

function el(tag: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  return node;
}
