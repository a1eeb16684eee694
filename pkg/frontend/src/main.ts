// Hash-routed single page: #/redeem, #/results, #/lab. The API base
// defaults to the page's own origin so the build is a static asset that
// any host can serve next to (or proxied in front of) the service.

import { ApiClient } from "./api.js";
import { text } from "./text.js";
import { labView, redeemView, resultsView } from "./views.js";

type Route = "redeem" | "results" | "lab";

const ROUTES: Record<Route, (root: HTMLElement, api: ApiClient) => void> = {
  redeem: redeemView,
  results: resultsView,
  lab: labView,
};

export function mount(container: HTMLElement, apiBase: string): void {
  const api = new ApiClient(apiBase);
  const nav = document.createElement("nav");
  for (const [route, label] of [
    ["redeem", text.navRedeem],
    ["results", text.navResults],
    ["lab", text.navLab],
  ] as const) {
    const link = document.createElement("a");
    link.href = `#/${route}`;
    link.textContent = label;
    link.id = `nav-${route}`;
    nav.append(link);
  }
  const heading = document.createElement("h1");
  heading.textContent = text.appTitle;
  const root = document.createElement("main");
  container.replaceChildren(heading, nav, root);

  const render = () => {
    const route = (location.hash.replace(/^#\//, "") || "redeem") as Route;
    (ROUTES[route] ?? redeemView)(root, api);
  };
  window.addEventListener("hashchange", render);
  render();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!, "");
}
