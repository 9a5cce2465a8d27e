import { ElicitationApi } from "./api.js";
import { bindKeyboard, renderView } from "./render.js";
import { SessionController } from "./state.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? "http://127.0.0.1:8000";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const controller = new SessionController(new ElicitationApi(serviceUrl));
controller.subscribe((view) => renderView(root, view, controller));
bindKeyboard(controller);
void controller.start();
