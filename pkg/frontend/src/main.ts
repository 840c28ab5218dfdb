import { createConsole } from "./console.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

// Served by meshpress-serve (same origin) by default; set a data attribute on
// the mount point to run the console standalone against another host.
createConsole(root, { baseUrl: root.dataset.serviceUrl ?? "" });
