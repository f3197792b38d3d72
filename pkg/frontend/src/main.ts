/**
 * Browser entry: boot the app against the service, paint on every state
 * change, and keep the URL fragment in sync so the session is shareable.
 */

import { ApiClient } from "./api";
import { App } from "./app";
import { paint, showMenu } from "./dom";
import { barMenu } from "./sankey";
import type { SceneNode } from "./scene";

// the engine's `serve` command defaults to 127.0.0.1:8787
const DEFAULT_BASE = "http://127.0.0.1:8787";

export async function boot(host: HTMLElement, base = DEFAULT_BASE): Promise<App> {
  const api = new ApiClient(base);
  const app = new App(api);
  await app.init(window.location.hash);

  const repaint = () => {
    const vp = {
      width: host.clientWidth || 1280,
      height: host.clientHeight || 720,
      zoom: 1,
      dpr: window.devicePixelRatio || 1,
    };
    paint(app.scene(vp), host, onAction);
    const fragment = app.urlFragment();
    if (window.location.hash !== fragment) {
      history.replaceState(null, "", fragment || "#");
    }
  };

  const onAction = (action: string, target: SceneNode, event: Event) => {
    if (action === "menu:bar" || action === "menu:band") {
      openMenu(action, target, event as MouseEvent);
      return;
    }
    void dispatch(action, target).then(repaint);
  };

  const openMenu = (kind: string, target: SceneNode, ev: MouseEvent) => {
    const entries =
      kind === "menu:bar"
        ? barMenu(String(target.attrs.iteration), Number(target.attrs.group))
        : [
            {
              label: "Show transition details",
              action:
                `class-connector:${target.attrs.from}.${target.attrs.fromGroup}` +
                `~${target.attrs.to}.${target.attrs.toGroup}`,
            },
          ];
    const box = host.getBoundingClientRect();
    showMenu(host, ev.clientX - box.left, ev.clientY - box.top, entries, (action) => {
      void dispatch(action, target).then(repaint);
    });
  };

  const dispatch = async (action: string, target: SceneNode): Promise<void> => {
    if (action === "toggle-visibility") {
      await app.toggleAxis(String(target.attrs.text));
    } else if (action === "set-threshold") {
      await app.setThreshold(Number(target.attrs.value));
    } else if (action.startsWith("select:")) {
      const [iteration, gid] = splitRef(action.slice("select:".length));
      app.select(iteration, gid);
    } else if (action.startsWith("class-full:")) {
      await app.shareColorsFor(action.slice("class-full:".length));
      await loadClouds();
    } else if (action.startsWith("class-transition-from:")) {
      const [iteration, gid] = splitRef(action.slice("class-transition-from:".length));
      await app.transitionClass(iteration, gid, "from");
      await loadClouds();
    } else if (action.startsWith("class-transition-to:")) {
      const [iteration, gid] = splitRef(action.slice("class-transition-to:".length));
      await app.transitionClass(iteration, gid, "to");
      await loadClouds();
    } else if (action.startsWith("class-connector:")) {
      const conn = parseConnector(action.slice("class-connector:".length), app);
      if (conn) {
        await app.connectorDetails(conn);
        await loadClouds();
      }
    }
  };

  const loadClouds = async (): Promise<void> => {
    if (!app.activeClass) return;
    try {
      await app.loadWordclouds(app.activeClass.id, "frequency");
    } catch {
      app.wordclouds = null; // numeric runs have no clouds
    }
  };

  window.addEventListener("hashchange", () => {
    void app.init(window.location.hash).then(repaint);
  });

  repaint();
  return app;
}

function splitRef(token: string): [string, number] {
  const dot = token.lastIndexOf(".");
  return [token.slice(0, dot), Number(token.slice(dot + 1))];
}

/** "a.g~b.h" from a band menu; a bare "a.g" bar token falls back to the
 * hovered connector touching that bar. */
function parseConnector(
  token: string,
  app: App,
): NonNullable<App["state"]["hovered"]> | null {
  const sep = token.indexOf("~");
  if (sep < 0) {
    const [iteration, gid] = splitRef(token);
    return app.connectorFromBar(iteration, gid);
  }
  const [from, fromGroup] = splitRef(token.slice(0, sep));
  const [to, toGroup] = splitRef(token.slice(sep + 1));
  return { from, fromGroup, to, toGroup };
}
