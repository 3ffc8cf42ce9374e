import { App } from "./app.js";
import { DEFAULT_CONFIG } from "./config.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
new App(root, DEFAULT_CONFIG);
