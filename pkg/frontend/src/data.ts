/**
 * Image sources: the CIFAR-10 binary format from a local directory, and a
 * synthetic two-class image generator for offline tests.
 *
 * CIFAR-10 binary batches are 10000 records of 3073 bytes (1 label byte +
 * 3072 channel-major pixels). Download and unpack cifar-10-binary.tar.gz
 * into dataDir; nothing is fetched at runtime.
 */

import { existsSync, readFileSync } from 'fs'
import { join } from 'path'
import * as tf from '@tensorflow/tfjs'

import { mulberry32 } from './backbone.js'

export interface LabeledImages {
  /** [n, 32, 32, 3] float32 in [0, 1] */
  images: tf.Tensor4D
  /** binary labels after class mapping: 0 for classes[0], 1 for classes[1] */
  labels: Uint8Array
}

const RECORD_BYTES = 3073
const PIXELS = 3072

function decodeBatch(buffer: Buffer, keep: [number, number]): { rows: Float32Array[]; labels: number[] } {
  const rows: Float32Array[] = []
  const labels: number[] = []
  for (let offset = 0; offset + RECORD_BYTES <= buffer.length; offset += RECORD_BYTES) {
    const label = buffer[offset]
    if (label !== keep[0] && label !== keep[1]) continue
    const px = new Float32Array(PIXELS)
    // channel-major (R plane, G plane, B plane) -> HWC
    for (let c = 0; c < 3; c += 1) {
      for (let i = 0; i < 1024; i += 1) {
        px[i * 3 + c] = buffer[offset + 1 + c * 1024 + i] / 255
      }
    }
    rows.push(px)
    labels.push(label === keep[0] ? 0 : 1)
  }
  return { rows, labels }
}

export function loadCifarBinary(dataDir: string, classes: [number, number], files?: string[]): LabeledImages {
  const names = files ?? ['data_batch_1.bin', 'data_batch_2.bin', 'data_batch_3.bin',
                          'data_batch_4.bin', 'data_batch_5.bin', 'test_batch.bin']
  const present = names.map((n) => join(dataDir, n)).filter((p) => existsSync(p))
  if (present.length === 0) {
    throw new Error(
      `no CIFAR-10 binary batches found in ${dataDir}; ` +
        'download cifar-10-binary.tar.gz and unpack it there',
    )
  }
  const rows: Float32Array[] = []
  const labels: number[] = []
  for (const path of present) {
    const decoded = decodeBatch(readFileSync(path), classes)
    rows.push(...decoded.rows)
    labels.push(...decoded.labels)
  }
  const flat = new Float32Array(rows.length * PIXELS)
  rows.forEach((r, i) => flat.set(r, i * PIXELS))
  return {
    images: tf.tensor4d(flat, [rows.length, 32, 32, 3]),
    labels: Uint8Array.from(labels),
  }
}

/**
 * Synthetic stand-in: class 0 images carry a low-frequency horizontal ramp,
 * class 1 a vertical one, both under pixel noise. Linearly separable after
 * any reasonable embedding, so head fine-tuning has something to learn.
 */
export function syntheticImages(nPerClass: number, seed: number): LabeledImages {
  const rand = mulberry32(seed)
  const n = nPerClass * 2
  const flat = new Float32Array(n * PIXELS)
  const labels = new Uint8Array(n)
  for (let s = 0; s < n; s += 1) {
    const label = s < nPerClass ? 0 : 1
    labels[s] = label
    for (let y = 0; y < 32; y += 1) {
      for (let x = 0; x < 32; x += 1) {
        const ramp = label === 0 ? x / 32 : y / 32
        for (let c = 0; c < 3; c += 1) {
          const noise = 0.25 * (rand() - 0.5)
          const value = 0.25 + 0.5 * ramp + noise
          flat[((s * 32 + y) * 32 + x) * 3 + c] = Math.min(1, Math.max(0, value))
        }
      }
    }
  }
  return { images: tf.tensor4d(flat, [n, 32, 32, 3]), labels }
}

/** Deterministic shuffled index split into fine-tune and export halves. */
export function splitIndices(n: number, finetuneFraction: number, seed: number): { finetune: number[]; exported: number[] } {
  const rand = mulberry32(seed + 17)
  const order = Array.from({ length: n }, (_, i) => i)
  for (let i = n - 1; i > 0; i -= 1) {
    const j = Math.floor(rand() * (i + 1))
    ;[order[i], order[j]] = [order[j], order[i]]
  }
  const cut = Math.min(n - 1, Math.max(1, Math.round(finetuneFraction * n)))
  return { finetune: order.slice(0, cut), exported: order.slice(cut) }
}

export function gatherImages(data: LabeledImages, indices: number[]): LabeledImages {
  const idx = tf.tensor1d(indices, 'int32')
  const images = tf.gather(data.images, idx) as tf.Tensor4D
  idx.dispose()
  return { images, labels: Uint8Array.from(indices.map((i) => data.labels[i])) }
}
