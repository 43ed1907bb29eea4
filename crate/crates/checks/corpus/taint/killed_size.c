int main(int fd) {
    char cmd[32];
    int n;
    int len;
    len = 0;
    n = recv(fd, cmd, 32, 0); // source:a
    len = 16;
    malloc(len); // clean
    malloc(n); // sink:a
    return 0;
}
