export class SchemaMismatch extends Error {}
export class MissingColumn extends Error {}
export class MissingData extends Error {}
