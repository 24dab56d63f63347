/** Ticking "retry in Ns" display for throttled scan triggers. */

export interface Countdown {
  cancel(): void;
}

/**
 * Count down inside `node` once per second, starting at `seconds`.
 * Calls `onDone` after reaching zero. Returns a handle whose cancel()
 * stops the ticking, for when the view is torn down early.
 */
export function startCountdown(node: HTMLElement, seconds: number,
                               onDone?: () => void): Countdown {
  let remaining = Math.max(0, Math.ceil(seconds));
  const render = () => {
    node.textContent = remaining > 0 ? `retry in ${remaining}s` : "ready to retry";
  };
  render();
  if (remaining === 0) {
    onDone?.();
    return { cancel() {} };
  }
  const timer = setInterval(() => {
    remaining -= 1;
    render();
    if (remaining <= 0) {
      clearInterval(timer);
      onDone?.();
    }
  }, 1000);
  return {
    cancel() {
      clearInterval(timer);
    },
  };
}
