import { Client } from "./api.js";
import { ConsoleController, bindDefaultElements } from "./controller.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? window.location.origin;

const controller = new ConsoleController(new Client(apiBase), bindDefaultElements(document));
void controller.init();

declare global {
  interface Window {
    consoleController: ConsoleController;
  }
}
window.consoleController = controller;
