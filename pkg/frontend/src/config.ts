/**
 * Exporter configuration: which backbone, which classes, how wide the
 * exported features are, and how the fine-tuning split is carved off.
 */

import { readFileSync } from 'fs'

export const FEATURE_DIMS = [256, 768, 1024] as const
export type FeatureDim = (typeof FEATURE_DIMS)[number]

export interface ExporterConfig {
  /** 'synthetic-patch' or a path/URL to a saved tfjs graph/layers model. */
  modelId: string
  /** The two dataset labels kept for the binary task. */
  classes: [number, number]
  /** Output feature dimension N (width of the retained head layer M_s). */
  featureDim: FeatureDim
  /** Fraction of the data used to fine-tune the head; the rest is exported. */
  finetuneFraction: number
  epochs: number
  batchSize: number
  learningRate: number
  seed: number
  /** Directory holding CIFAR-10 binary batches (data_batch_*.bin). */
  dataDir?: string
}

export const DEFAULT_CONFIG: ExporterConfig = {
  modelId: 'synthetic-patch',
  classes: [0, 1],
  featureDim: 256,
  finetuneFraction: 0.5,
  epochs: 10,
  batchSize: 32,
  learningRate: 0.01,
  seed: 0,
}

export function validateConfig(config: ExporterConfig): ExporterConfig {
  if (!FEATURE_DIMS.includes(config.featureDim)) {
    throw new Error(`featureDim must be one of ${FEATURE_DIMS.join(', ')}, got ${config.featureDim}`)
  }
  if (config.classes[0] === config.classes[1]) {
    throw new Error('the two target classes must be distinct')
  }
  if (!(config.finetuneFraction > 0 && config.finetuneFraction < 1)) {
    throw new Error('finetuneFraction must be strictly between 0 and 1')
  }
  if (config.epochs < 0 || config.batchSize < 1 || config.learningRate <= 0) {
    throw new Error('invalid training hyperparameters')
  }
  return config
}

export function loadConfig(path: string): ExporterConfig {
  const raw = JSON.parse(readFileSync(path, 'utf-8'))
  return validateConfig({ ...DEFAULT_CONFIG, ...raw })
}
