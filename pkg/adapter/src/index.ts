export { FrameDecoder, decodeImage, encodeFrame, errorResponse } from "./wire";
export { PREDICTORS, centroid, constantClass, constantReg, meanIntensity }
  from "./predictors";
export { ServeOptions, handleRequest, serve, serveHttp, serveStdio }
  from "./serve";
export * from "./types";
