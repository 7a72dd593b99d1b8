import { ApiClient } from "./api.js";
import { App } from "./app.js";

const DEFAULT_USER_IDS = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

function mount(): void {
  const root = document.getElementById("app");
  if (root === null) {
    throw new Error("missing #app mount point");
  }
  const app = new App(root, new ApiClient(""), DEFAULT_USER_IDS);
  void app.start();
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", mount);
} else {
  mount();
}
