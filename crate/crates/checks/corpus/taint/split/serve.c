int serve(int fd) {
    char req[256];
    recv(fd, req, 256, 0); // source:a
    handler(req);
    return 0;
}
