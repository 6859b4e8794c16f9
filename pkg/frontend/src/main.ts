/** Browser entry point; inert outside a DOM host. */

import { buildApp } from "./app.js";

if (typeof document !== "undefined") {
  const mount = document.getElementById("app");
  if (mount) buildApp(mount);
}
