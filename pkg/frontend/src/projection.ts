/**
 * Pane projections.  The front pane shows the horizontal axis against
 * the vertical one (y up on screen); the 3D side pane shows depth
 * against the vertical axis.  World vector order follows the server:
 * 2D scenes are (x, y) with y vertical, 3D scenes are (x, y, z) with z
 * vertical and y the depth axis.
 */

import { HelloMessage } from "./protocol.js";
import { SetTargetCommand } from "./protocol.js";

export interface Pane {
  name: "front" | "side";
  /** pixel rectangle on the canvas */
  left: number;
  top: number;
  width: number;
  height: number;
  /** world axis indices drawn horizontally / vertically */
  axisH: number;
  axisV: number;
  /** world bounds along those axes */
  hMin: number;
  hMax: number;
  vMin: number;
  vMax: number;
}

const MARGIN = 24;

function verticalAxis(dims: number): number {
  return dims === 3 ? 2 : 1;
}

/** Lay out the panes for a scenario inside a canvas of the given size. */
export function makePanes(
  hello: HelloMessage,
  canvasWidth: number,
  canvasHeight: number,
): Pane[] {
  const dims = hello.workspace.min.length;
  const axisV = verticalAxis(dims);
  const paneCount = dims === 3 ? 2 : 1;
  const paneWidth = Math.floor(canvasWidth / paneCount);
  const panes: Pane[] = [];
  const mk = (
    name: "front" | "side",
    index: number,
    axisH: number,
  ): Pane => ({
    name,
    left: index * paneWidth + MARGIN,
    top: MARGIN,
    width: paneWidth - 2 * MARGIN,
    height: canvasHeight - 2 * MARGIN,
    axisH,
    axisV,
    hMin: hello.workspace.min[axisH],
    hMax: hello.workspace.max[axisH],
    vMin: hello.workspace.min[axisV],
    vMax: hello.workspace.max[axisV],
  });
  panes.push(mk("front", 0, 0));
  if (dims === 3) panes.push(mk("side", 1, 1));
  return panes;
}

/** World point to canvas pixel within a pane (screen y grows downward). */
export function worldToPixel(pane: Pane, point: number[]): [number, number] {
  const fh = (point[pane.axisH] - pane.hMin) / (pane.hMax - pane.hMin);
  const fv = (point[pane.axisV] - pane.vMin) / (pane.vMax - pane.vMin);
  return [pane.left + fh * pane.width, pane.top + (1 - fv) * pane.height];
}

/**
 * Inverse of worldToPixel for this pane's two axes; null when the
 * pixel lies outside the pane's workspace projection.
 */
export function pixelToWorld(
  pane: Pane,
  px: number,
  py: number,
): { h: number; v: number } | null {
  const fh = (px - pane.left) / pane.width;
  const fv = 1 - (py - pane.top) / pane.height;
  if (fh < 0 || fh > 1 || fv < 0 || fv > 1) return null;
  return {
    h: pane.hMin + fh * (pane.hMax - pane.hMin),
    v: pane.vMin + fv * (pane.vMax - pane.vMin),
  };
}

/** Find the pane containing a pixel, if any. */
export function paneAt(panes: Pane[], px: number, py: number): Pane | null {
  for (const pane of panes) {
    if (
      px >= pane.left &&
      px <= pane.left + pane.width &&
      py >= pane.top &&
      py <= pane.top + pane.height
    ) {
      return pane;
    }
  }
  return null;
}

/**
 * Turn a click into a set_target command.  Axes not shown in the
 * clicked pane keep their value from the current target, so in 3D the
 * front pane sets x and the vertical, the side pane sets depth and the
 * vertical.  Returns null for clicks outside the workspace projection.
 */
export function clickToTarget(
  pane: Pane,
  px: number,
  py: number,
  currentTarget: number[],
  seq: number,
): SetTargetCommand | null {
  const world = pixelToWorld(pane, px, py);
  if (world === null) return null;
  const pos = currentTarget.slice();
  pos[pane.axisH] = world.h;
  pos[pane.axisV] = world.v;
  return { type: "set_target", seq, pos };
}
