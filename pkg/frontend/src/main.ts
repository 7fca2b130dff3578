import { ApiClient } from "./api.js";
import { App } from "./app.js";

const POLL_MS = 1000;

function start(): void {
  const container = document.getElementById("app");
  if (!container) throw new Error("missing #app container");
  const api = new ApiClient("");
  const app = new App(api, document, container);

  const form = document.getElementById("attach-form") as HTMLFormElement;
  const input = document.getElementById("session-input") as HTMLInputElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const sid = input.value.trim();
    if (sid) {
      const url = new URL(window.location.href);
      url.searchParams.set("session", sid);
      window.history.replaceState(null, "", url.toString());
      app.attach(sid);
      void app.poll();
    }
  });

  const fromUrl = new URL(window.location.href).searchParams.get("session");
  if (fromUrl) {
    input.value = fromUrl;
    app.attach(fromUrl);
    void app.poll();
  }
  window.setInterval(() => void app.poll(), POLL_MS);
}

start();
