/** Spawns the real HTTP service for end-to-end tests. */

import { spawn, type ChildProcess } from "node:child_process";
import { createServer } from "node:net";

export interface Backend {
  baseUrl: string;
  stop(): Promise<void>;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      const port = address.port;
      probe.close(() => resolve(port));
    });
  });
}

async function waitReady(baseUrl: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 20000;
  let lastError = "";
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`server exited early (${child.exitCode}): ${lastError}`);
    }
    try {
      const response = await fetch(`${baseUrl}/v1/actions`);
      if (response.ok) return;
      lastError = `status ${response.status}`;
    } catch (error) {
      lastError = String(error);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error(`server never came up: ${lastError}`);
}

export async function startBackend(): Promise<Backend> {
  const port = await freePort();
  const child = spawn(
    "python3",
    ["-m", "uvicorn", "robochat.api:app", "--host", "127.0.0.1", "--port", String(port), "--log-level", "warning"],
    { cwd: "..", stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  child.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });
  const baseUrl = `http://127.0.0.1:${port}`;
  try {
    await waitReady(baseUrl, child);
  } catch (error) {
    child.kill("SIGKILL");
    throw new Error(`${String(error)}\n${stderr}`);
  }
  return {
    baseUrl,
    stop(): Promise<void> {
      return new Promise((resolve) => {
        child.once("exit", () => resolve());
        child.kill("SIGTERM");
        setTimeout(() => {
          if (child.exitCode === null) child.kill("SIGKILL");
        }, 2000).unref();
      });
    },
  };
}

/** Polls until the probe stops throwing; the DOM equivalent of waiting
 * for the page to settle. */
export async function waitFor<T>(probe: () => T, timeoutMs = 10000): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = new Error("timeout");
  while (Date.now() < deadline) {
    try {
      return probe();
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
  throw lastError;
}
