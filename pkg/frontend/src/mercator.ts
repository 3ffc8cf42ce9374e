/** Web Mercator math for the slippy map, in world pixels at a zoom. */

export const TILE_SIZE = 256;

/** Latitudes beyond this fold into the projection's poles. */
export const MAX_LAT = 85.05112877980659;

function worldSize(zoom: number): number {
  return TILE_SIZE * 2 ** zoom;
}

export function clampLat(lat: number): number {
  return Math.max(-MAX_LAT, Math.min(MAX_LAT, lat));
}

export function lonToX(lon: number, zoom: number): number {
  return ((lon + 180) / 360) * worldSize(zoom);
}

export function latToY(lat: number, zoom: number): number {
  const rad = (clampLat(lat) * Math.PI) / 180;
  return ((1 - Math.asinh(Math.tan(rad)) / Math.PI) / 2) * worldSize(zoom);
}

export function xToLon(x: number, zoom: number): number {
  return (x / worldSize(zoom)) * 360 - 180;
}

export function yToLat(y: number, zoom: number): number {
  const n = Math.PI - (2 * Math.PI * y) / worldSize(zoom);
  return (Math.atan(Math.sinh(n)) * 180) / Math.PI;
}

export interface TileCoord {
  z: number;
  x: number;
  y: number;
}

/** Tiles covering a w-by-h pixel viewport centered on (lat, lon). */
export function tilesFor(
  lat: number,
  lon: number,
  zoom: number,
  w: number,
  h: number,
): TileCoord[] {
  const cx = lonToX(lon, zoom);
  const cy = latToY(lat, zoom);
  const x0 = Math.floor((cx - w / 2) / TILE_SIZE);
  const x1 = Math.floor((cx + w / 2) / TILE_SIZE);
  const y0 = Math.floor((cy - h / 2) / TILE_SIZE);
  const y1 = Math.floor((cy + h / 2) / TILE_SIZE);
  const last = 2 ** zoom - 1;
  const tiles: TileCoord[] = [];
  for (let y = Math.max(0, y0); y <= Math.min(last, y1); y++) {
    for (let x = Math.max(0, x0); x <= Math.min(last, x1); x++) {
      tiles.push({ z: zoom, x, y });
    }
  }
  return tiles;
}

export function tileUrl(template: string, tile: TileCoord): string {
  return template
    .replace("{z}", String(tile.z))
    .replace("{x}", String(tile.x))
    .replace("{y}", String(tile.y));
}
