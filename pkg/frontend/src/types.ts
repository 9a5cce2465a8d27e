export interface StateRow {
  time_s: number;
  h_ft: number;
  h_dot_fps: number;
  x_dot_fps: number;
  vertical_accel_fps2: number;
  horizontal_accel_fps2: number;
}

export interface QueryPayload {
  iteration: number;
  token: string;
  time_step: number;
  rollouts_a: StateRow[][];
  rollouts_b: StateRow[][];
}

export interface SessionPayload {
  iteration: number;
  max_iter: number;
  done: boolean;
  method: string;
  records: number;
  estimate: number[] | null;
}

export interface PosteriorPayload {
  iteration: number;
  acceptance_rate: number;
  samples: number[][];
  grid: {
    alpha: number[];
    beta: number[];
    density: number[][];
  };
}

export interface PreferenceResult {
  iteration: number;
  done: boolean;
  estimate: number[];
}

export type Choice = "a" | "b";
