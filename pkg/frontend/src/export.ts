/**
 * End-to-end exporter: fine-tune the head on one split, push the held-out
 * split through the truncated extractor V_e = M_s ∘ E_p, and write the
 * feature CSV (`label,f0,...,f{N-1}`) plus a manifest JSON with a sha256
 * checksum. The CSV is the handoff contract with the quantum pipeline.
 */

import { createHash } from 'crypto'
import { writeFileSync } from 'fs'
import * as tf from '@tensorflow/tfjs'

import { resolveBackbone } from './backbone.js'
import { ExporterConfig, validateConfig } from './config.js'
import { LabeledImages, gatherImages, loadCifarBinary, splitIndices, syntheticImages } from './data.js'
import { FinetuneResult, Head } from './head.js'

export interface ExportOutcome {
  finetune: FinetuneResult
  nExported: number
  featureDim: number
  csvPath: string
  manifestPath: string
  checksum: string
}

function loadDataset(config: ExporterConfig): LabeledImages {
  if (config.dataDir) {
    return loadCifarBinary(config.dataDir, config.classes)
  }
  // Offline stand-in so the exporter runs end to end without downloads.
  return syntheticImages(120, config.seed)
}

export function formatCsv(features: Float32Array, labels: Uint8Array, dim: number): string {
  const lines: string[] = []
  const header = ['label']
  for (let i = 0; i < dim; i += 1) header.push(`f${i}`)
  lines.push(header.join(','))
  for (let row = 0; row < labels.length; row += 1) {
    const cells: string[] = [String(labels[row])]
    for (let col = 0; col < dim; col += 1) {
      cells.push(String(features[row * dim + col]))
    }
    lines.push(cells.join(','))
  }
  return lines.join('\n') + '\n'
}

export async function runExport(config: ExporterConfig, csvPath: string): Promise<ExportOutcome> {
  validateConfig(config)
  const backbone = await resolveBackbone(config.modelId, config.seed)
  const dataset = loadDataset(config)
  const { finetune, exported } = splitIndices(
    dataset.labels.length,
    config.finetuneFraction,
    config.seed,
  )

  const tuneData = gatherImages(dataset, finetune)
  const exportData = gatherImages(dataset, exported)
  const head = new Head(config.featureDim, config.seed)

  const tuneEmbeddings = backbone.embed(tuneData.images)
  const result = head.finetune(
    tuneEmbeddings,
    tuneData.labels,
    config.epochs,
    config.batchSize,
    config.learningRate,
    config.seed,
  )

  // Truncate the head: only M_s survives into the feature extractor.
  const exportEmbeddings = backbone.embed(exportData.images)
  const features = head.features(exportEmbeddings)
  const csv = formatCsv(
    features.dataSync() as Float32Array,
    exportData.labels,
    config.featureDim,
  )
  writeFileSync(csvPath, csv, 'utf-8')
  const checksum = createHash('sha256').update(csv).digest('hex')

  const counts: Record<string, number> = { '0': 0, '1': 0 }
  exportData.labels.forEach((l) => {
    counts[String(l)] += 1
  })
  const manifest = {
    n_records: exportData.labels.length,
    feature_dim: config.featureDim,
    class_counts: counts,
    source: `${backbone.name} classes=${config.classes.join('/')} seed=${config.seed}`,
    checksum,
    finetune: { n: tuneData.labels.length, accuracy: result.accuracy, losses: result.losses },
  }
  const manifestPath = csvPath + '.manifest.json'
  writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n', 'utf-8')

  tf.dispose([tuneData.images, exportData.images, tuneEmbeddings, exportEmbeddings, features, dataset.images])
  head.dispose()
  return {
    finetune: result,
    nExported: exportData.labels.length,
    featureDim: config.featureDim,
    csvPath,
    manifestPath,
    checksum,
  }
}
