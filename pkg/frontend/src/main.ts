/** Entry point: mount the wizard onto a container element. */

import { PetelkitClient } from "./api.js";
import { SessionFlow } from "./flow.js";
import { render } from "./view.js";

export interface MountOptions {
  baseUrl?: string;
  resumeSessionId?: string;
}

export function mountApp(container: HTMLElement, options: MountOptions = {}): SessionFlow {
  const win = container.ownerDocument.defaultView;
  const baseUrl = options.baseUrl ?? win?.location?.origin ?? "http://127.0.0.1:8571";
  const flow = new SessionFlow(new PetelkitClient(baseUrl));
  flow.subscribe((state) => render(container, state, flow));
  if (options.resumeSessionId) {
    void flow.resume(options.resumeSessionId);
  } else {
    void flow.loadSchemas();
  }
  return flow;
}

declare global {
  interface Window {
    petelkitMount?: typeof mountApp;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.petelkitMount = mountApp;
  const container = document.getElementById("app");
  if (container) {
    const params = new URLSearchParams(window.location.search);
    mountApp(container, {
      baseUrl: params.get("service") ?? undefined,
      resumeSessionId: params.get("session") ?? undefined,
    });
  }
}
