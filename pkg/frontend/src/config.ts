/** Build-time configuration. Edit and rebuild to point elsewhere. */
export interface AppConfig {
  /** Base URL of the retrieval service, no trailing slash. */
  apiBase: string;
  /** Slippy tile template with {z}/{x}/{y} placeholders. */
  tileUrl: string;
}

export const DEFAULT_CONFIG: AppConfig = {
  apiBase: "http://127.0.0.1:8000",
  tileUrl: "public/tiles/{z}/{x}/{y}.png",
};
