// Thin client for the wire_v1 protocol: it renders server snapshots and
// forwards input. All rules live on the server.
const CANDY_COLOURS = ["#f5f5f5", "#111111", "#dd3333", "#33aa33", "#3366cc", "#eecc22"];
const KEYS = { ArrowUp: "up", ArrowDown: "down", ArrowLeft: "left", ArrowRight: "right", w: "up", s: "down", a: "left", d: "right" };

let socket = null;
let view = { state: null, options: null, pause: null };
let pauseTimer = null;

const $ = (id) => document.getElementById(id);

function send(input) {
  if (socket && socket.readyState === WebSocket.OPEN) socket.send(JSON.stringify(input));
}

async function start(event) {
  event.preventDefault();
  const form = new FormData(event.target);
  const body = { version: form.get("version"), offline: form.get("offline") === "on" };
  const response = await fetch("/sessions", { method: "POST", headers: { "content-type": "application/json" }, body: JSON.stringify(body) });
  const created = await response.json();
  if (!response.ok) { alert(created.error); return; }
  $("play").hidden = false;
  $("result").hidden = true;
  const proto = location.protocol === "https:" ? "wss" : "ws";
  socket = new WebSocket(`${proto}://${location.host}${created.ws_url}`);
  socket.onmessage = (m) => receive(JSON.parse(m.data));
  socket.onclose = (e) => { $("status").textContent = e.reason || ""; };
}

function receive(msg) {
  switch (msg.kind) {
    case "state": view.state = msg.payload; render(); break;
    case "options": view.options = msg.payload; render(); break;
    case "pause": view.pause = { ...msg.payload, at: performance.now() }; animatePause(); break;
    case "event": if (msg.payload.type === "takeover") $("status").textContent = msg.payload.message; break;
    case "error": $("status").textContent = msg.payload.message; break;
    case "result": showResult(msg.payload); break;
  }
}

function render() {
  const s = view.state;
  if (!s) return;
  $("story").textContent = s.story;
  const game = s.game;
  const pending = s.generation_pending;
  const paused = game && game.phase.phase === "paused";
  for (const slot of [0, 1]) {
    const box = $(`option-${slot}`);
    const option = view.options && view.options.turn === s.turn ? view.options.options[slot] : null;
    box.querySelector("p").textContent = option ? option.text : "";
    box.className = "option" + (option && option.candy ? ` candy-${option.candy}` : "");
    box.querySelector("button").hidden = !!game;
    box.querySelector("button").disabled = pending;
  }
  const selfOpen = game ? paused && game.phase.self_write_enabled : true;
  $("self-write").hidden = !selfOpen;
  $("self-commit").disabled = pending;
  $("end-pause").hidden = !game;
  $("end-pause").disabled = !paused;
  $("end-story").hidden = !!game;
  $("end-story").disabled = pending;
  $("countdown").hidden = !game;
  $("lives").textContent = game ? "♥".repeat(game.lives) : "";
  if (game) drawBoard(game);
}

function drawBoard(game) {
  const canvas = $("board");
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / game.map_size;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const fill = (p, colour, inset = 1) => { ctx.fillStyle = colour; ctx.fillRect(p.x * cell + inset, p.y * cell + inset, cell - 2 * inset, cell - 2 * inset); };
  game.obstacles.forEach((p) => fill(p, "#8a7f70"));
  game.candies.forEach((c) => fill(c.position, CANDY_COLOURS[c.kind_id], cell / 4));
  game.snake.forEach((p, i) => fill(p, i === 0 ? "#f0e68c" : "#c9b458"));
}

function animatePause() {
  clearInterval(pauseTimer);
  const bar = $("countdown-bar");
  const p = view.pause;
  pauseTimer = setInterval(() => {
    const left = Math.max(0, p.remaining_ms - (performance.now() - p.at));
    bar.style.width = `${(100 * left) / p.total_ms}%`;
    if (left === 0) clearInterval(pauseTimer);
  }, 50);
}

function showResult(result) {
  $("play").hidden = true;
  $("result").hidden = false;
  $("result-story").textContent = result.full_story;
  const stats = [`Story length: ${result.story_word_count} words`];
  if (result.snake_length !== undefined) stats.push(`Snake length: ${result.snake_length}`);
  for (const [kind, count] of Object.entries(result.candies_eaten || {})) stats.push(`${kind} candies: ${count}`);
  $("result-stats").innerHTML = stats.map((s) => `<li>${s}</li>`).join("");
  $("result-log").href = result.log_url || "#";
}

$("start").addEventListener("submit", start);
document.querySelectorAll("#options button").forEach((b) => b.addEventListener("click", () => send({ choose_slot: Number(b.dataset.slot) })));
$("self-write").addEventListener("submit", (e) => { e.preventDefault(); send({ self_text: $("self-text").value }); $("self-text").value = ""; });
$("end-pause").addEventListener("click", () => send({ end_pause: true }));
$("end-story").addEventListener("click", () => send({ end_story: true }));
document.addEventListener("keydown", (e) => {
  if (document.activeElement === $("self-text")) return;
  const dir = KEYS[e.key];
  if (dir) { e.preventDefault(); send({ steer: dir }); }
});
