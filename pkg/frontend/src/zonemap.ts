/** Top-down workspace views: the zone map and the supervisory jog grid.
 *
 * Both are projections of GET /state; the page draws the cells exactly
 * as the service reports them and adds nothing of its own.
 */

import type { GridView, SessionState } from "./types.js";

export const ZONE_LAYOUT: string[][] = [
  ["table_left", "table_center", "table_right"],
  ["sink", "bowl", "cabinet"],
  ["machine", "home", ""],
];

export interface ZoneCellView {
  zone: string;
  objects: string[];
  armHere: boolean;
  note: string;
}

export function zoneMapModel(state: SessionState): ZoneCellView[][] {
  const stackTops = new Map<string, string>();
  for (const pair of state.stacks) {
    // pair is [base, rider]
    stackTops.set(pair[0], pair[1]);
  }
  return ZONE_LAYOUT.map((row) =>
    row.map((zone) => {
      if (!zone) return { zone: "", objects: [], armHere: false, note: "" };
      const objects = (state.zones[zone] ?? []).map((name) => {
        const rider = stackTops.get(name);
        return rider ? `${rider} on ${name}` : name;
      });
      let note = "";
      if (zone === "machine") note = state.machine_on ? "on" : "off";
      if (zone === "cabinet") note = state.cabinet_door_open ? "door open" : "door closed";
      return { zone, objects, armHere: state.arm_zone === zone, note };
    }),
  );
}

export function gripperCaption(state: SessionState): string {
  const jaw = state.gripper.open ? "open" : "closed";
  const held = state.gripper.held ? `, holding ${state.gripper.held}` : "";
  return `gripper ${jaw} at ${state.arm_zone}${held}`;
}

// -- supervisory grid --------------------------------------------------------

export interface GridCellView {
  x: number;
  y: number;
  /** Stacked markers for everything in this column, lowest first. */
  markers: string[];
  gripperHeight: number | null;
}

/**
 * The jog space is a small x (left-right) by y (near-far) by z (height)
 * grid; the view flattens it top-down with per-cell height badges.
 */
export function gridModel(grid: GridView): GridCellView[][] {
  const rows: GridCellView[][] = [];
  for (let y = 0; y < 5; y++) {
    const row: GridCellView[] = [];
    for (let x = 0; x < 5; x++) {
      const markers: string[] = [];
      for (const [name, cell] of Object.entries(grid.object_cells)) {
        if (cell[0] === x && cell[1] === y) markers.push(`${name} z${cell[2]}`);
      }
      for (const cell of grid.obstacle_cells) {
        if (cell[0] === x && cell[1] === y) markers.push(`obstacle z${cell[2]}`);
      }
      const gripperHeight =
        grid.gripper_cell[0] === x && grid.gripper_cell[1] === y ? grid.gripper_cell[2] : null;
      row.push({ x, y, markers: markers.sort(), gripperHeight });
    }
    rows.push(row);
  }
  return rows;
}
