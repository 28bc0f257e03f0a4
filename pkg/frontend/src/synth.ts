// Minimal oscillator-envelope voice for auditioning variants. One variant
// plays at a time; the active note index is reported so the piano roll can
// highlight it. Audio being unavailable degrades to visual-only mode.

import { PlannedNote, totalSeconds } from "./playback.js";

const ATTACK = 0.02;
const RELEASE = 0.05;

export class Synth {
  private ctx: AudioContext | null = null;
  private playing: { oscillators: OscillatorNode[]; timers: number[] } | null = null;

  available(): boolean {
    return typeof AudioContext !== "undefined";
  }

  private context(): AudioContext | null {
    if (!this.available()) return null;
    if (!this.ctx) this.ctx = new AudioContext();
    return this.ctx;
  }

  /** Play a plan; onNote fires per note with its index, onDone at the end. */
  play(plan: PlannedNote[], onNote?: (index: number) => void, onDone?: () => void) {
    this.stop();
    const ctx = this.context();
    if (!ctx) {
      onDone?.();
      return;
    }
    const t0 = ctx.currentTime + 0.05;
    const oscillators: OscillatorNode[] = [];
    const timers: number[] = [];
    for (const note of plan) {
      const osc = ctx.createOscillator();
      osc.type = "triangle";
      osc.frequency.value = note.frequency;
      const gain = ctx.createGain();
      const start = t0 + note.startSeconds;
      const stop = start + note.durationSeconds;
      gain.gain.setValueAtTime(0, start);
      gain.gain.linearRampToValueAtTime(0.25, start + ATTACK);
      gain.gain.setValueAtTime(0.25, Math.max(start + ATTACK, stop - RELEASE));
      gain.gain.linearRampToValueAtTime(0, stop);
      osc.connect(gain).connect(ctx.destination);
      osc.start(start);
      osc.stop(stop + 0.01);
      oscillators.push(osc);
      if (onNote) {
        timers.push(window.setTimeout(
          () => onNote(note.index), (0.05 + note.startSeconds) * 1000));
      }
    }
    if (onDone) {
      timers.push(window.setTimeout(
        () => { this.playing = null; onDone(); },
        (0.05 + totalSeconds(plan) + 0.1) * 1000));
    }
    this.playing = { oscillators, timers };
  }

  stop() {
    if (!this.playing) return;
    for (const osc of this.playing.oscillators) {
      try { osc.stop(); osc.disconnect(); } catch { /* already ended */ }
    }
    for (const timer of this.playing.timers) window.clearTimeout(timer);
    this.playing = null;
  }
}
