/** Hand-rolled slippy map: positioned tile images, a draggable user
 * marker with a heading arrow, and dots for retrieved media. No
 * panning inertia, no fractional zoom; this is a placement tool, not
 * a GIS.
 */

import { TILE_SIZE, latToY, lonToX, tileUrl, tilesFor, xToLon, yToLat } from "./mercator.js";
import type { TileCoord } from "./mercator.js";

export interface MapOptions {
  tileUrl: string;
  centerLat: number;
  centerLon: number;
  zoom?: number;
  width?: number;
  height?: number;
  onPlace: (lat: number, lon: number) => void;
}

interface MediaPoint {
  id: string;
  lat: number;
  lon: number;
}

export class SlippyMap {
  readonly width: number;
  readonly height: number;
  readonly zoom: number;

  private centerLat: number;
  private centerLon: number;
  private user: { lat: number; lon: number; headingDeg: number } | null = null;
  private media: MediaPoint[] = [];

  private readonly tiles: HTMLElement;
  private readonly marker: HTMLElement;
  private readonly arrow: HTMLElement;
  private readonly dots: HTMLElement;

  constructor(
    private readonly container: HTMLElement,
    private readonly opts: MapOptions,
  ) {
    this.width = opts.width ?? container.clientWidth ?? 512;
    this.height = opts.height ?? container.clientHeight ?? 384;
    if (this.width <= 0) this.width = 512;
    if (this.height <= 0) this.height = 384;
    this.zoom = opts.zoom ?? 16;
    this.centerLat = opts.centerLat;
    this.centerLon = opts.centerLon;

    container.classList.add("map");
    container.style.position = "relative";
    container.style.overflow = "hidden";
    container.style.width = `${this.width}px`;
    container.style.height = `${this.height}px`;

    this.tiles = this.child("div", "map-tiles");
    this.dots = this.child("div", "map-media");
    this.marker = this.child("div", "map-marker");
    this.marker.hidden = true;
    this.arrow = document.createElement("div");
    this.arrow.className = "map-arrow";
    this.marker.appendChild(this.arrow);

    container.addEventListener("click", (ev) => this.onClick(ev));
    this.marker.addEventListener("mousedown", (ev) => this.onMarkerDown(ev));
    this.draw();
  }

  panTo(lat: number, lon: number): void {
    this.centerLat = lat;
    this.centerLon = lon;
    this.draw();
  }

  setUser(lat: number, lon: number, headingDeg: number): void {
    this.user = { lat, lon, headingDeg };
    this.draw();
  }

  setMedia(points: MediaPoint[]): void {
    this.media = points;
    this.draw();
  }

  /** Viewport pixel of a geographic point, relative to the top left. */
  toPixel(lat: number, lon: number): { x: number; y: number } {
    const x = lonToX(lon, this.zoom) - (lonToX(this.centerLon, this.zoom) - this.width / 2);
    const y = latToY(lat, this.zoom) - (latToY(this.centerLat, this.zoom) - this.height / 2);
    return { x, y };
  }

  toLatLon(px: number, py: number): { lat: number; lon: number } {
    const x = lonToX(this.centerLon, this.zoom) - this.width / 2 + px;
    const y = latToY(this.centerLat, this.zoom) - this.height / 2 + py;
    return { lat: yToLat(y, this.zoom), lon: xToLon(x, this.zoom) };
  }

  private child(tag: string, className: string): HTMLElement {
    const el = document.createElement(tag);
    el.className = className;
    this.container.appendChild(el);
    return el;
  }

  private viewportPoint(ev: MouseEvent): { x: number; y: number } {
    const rect = this.container.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  }

  private onClick(ev: MouseEvent): void {
    if (ev.target === this.marker || ev.target === this.arrow) return;
    const { x, y } = this.viewportPoint(ev);
    const { lat, lon } = this.toLatLon(x, y);
    this.opts.onPlace(lat, lon);
  }

  private onMarkerDown(down: MouseEvent): void {
    down.preventDefault();
    down.stopPropagation();
    const move = (ev: MouseEvent) => {
      const { x, y } = this.viewportPoint(ev);
      this.marker.style.left = `${x}px`;
      this.marker.style.top = `${y}px`;
    };
    const up = (ev: MouseEvent) => {
      document.removeEventListener("mousemove", move);
      document.removeEventListener("mouseup", up);
      const { x, y } = this.viewportPoint(ev);
      const { lat, lon } = this.toLatLon(x, y);
      this.opts.onPlace(lat, lon);
    };
    document.addEventListener("mousemove", move);
    document.addEventListener("mouseup", up);
  }

  private draw(): void {
    this.tiles.textContent = "";
    const originX = lonToX(this.centerLon, this.zoom) - this.width / 2;
    const originY = latToY(this.centerLat, this.zoom) - this.height / 2;
    for (const tile of this.visibleTiles()) {
      const img = document.createElement("img");
      img.className = "map-tile";
      img.src = tileUrl(this.opts.tileUrl, tile);
      img.alt = "";
      img.draggable = false;
      img.style.position = "absolute";
      img.style.left = `${tile.x * TILE_SIZE - originX}px`;
      img.style.top = `${tile.y * TILE_SIZE - originY}px`;
      this.tiles.appendChild(img);
    }

    this.dots.textContent = "";
    for (const point of this.media) {
      const { x, y } = this.toPixel(point.lat, point.lon);
      if (x < 0 || y < 0 || x > this.width || y > this.height) continue;
      const dot = document.createElement("div");
      dot.className = "map-dot";
      dot.title = point.id;
      dot.dataset.mediaId = point.id;
      dot.style.left = `${x}px`;
      dot.style.top = `${y}px`;
      this.dots.appendChild(dot);
    }

    if (this.user) {
      const { x, y } = this.toPixel(this.user.lat, this.user.lon);
      this.marker.hidden = false;
      this.marker.style.left = `${x}px`;
      this.marker.style.top = `${y}px`;
      this.arrow.style.transform = `rotate(${this.user.headingDeg}deg)`;
    }
  }

  private visibleTiles(): TileCoord[] {
    return tilesFor(this.centerLat, this.centerLon, this.zoom, this.width, this.height);
  }
}
