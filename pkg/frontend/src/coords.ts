// Click coordinates: the frame is rendered at its native 1920x1080 logical
// size but displayed scaled; the service expects logical pixels.

export const LOGICAL_W = 1920;
export const LOGICAL_H = 1080;

export interface LogicalPoint {
  x: number;
  y: number;
}

export function unscaleClick(
  offsetX: number,
  offsetY: number,
  displayW: number,
  displayH: number,
): LogicalPoint {
  if (displayW <= 0 || displayH <= 0) {
    return { x: 0, y: 0 };
  }
  const x = Math.round((offsetX / displayW) * LOGICAL_W);
  const y = Math.round((offsetY / displayH) * LOGICAL_H);
  return {
    x: Math.max(0, Math.min(LOGICAL_W - 1, x)),
    y: Math.max(0, Math.min(LOGICAL_H - 1, y)),
  };
}
